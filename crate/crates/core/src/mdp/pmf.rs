use serde::{Deserialize, Serialize};

/// A finite probability mass function over real reward values.
///
/// Atoms are kept sorted by value and identical values are merged, so two
/// pmfs describing the same distribution compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct Pmf {
    atoms: Vec<(f64, f64)>,
}

impl Pmf {
    /// Builds a pmf from `(value, probability)` pairs. Zero-probability atoms
    /// are kept so that validation can still see them; duplicates are summed.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Pmf { atoms: merged }
    }

    pub fn point(value: f64) -> Self {
        Pmf {
            atoms: vec![(value, 1.0)],
        }
    }

    /// Weighted mixture `Σ w_i · pmf_i`. Weights are not renormalised.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a Pmf)>) -> Self {
        Pmf::new(
            parts
                .into_iter()
                .flat_map(|(w, pmf)| pmf.atoms.iter().map(move |&(v, p)| (v, w * p))),
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Atoms with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().filter(|&(_, p)| p > 0.0)
    }

    pub fn support_len(&self) -> usize {
        self.support().count()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    /// Returns the value if all mass sits on a single atom.
    pub fn as_point(&self) -> Option<f64> {
        let mut support = self.support();
        let (v, _) = support.next()?;
        support.next().is_none().then_some(v)
    }

    pub fn prob_of(&self, value: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.0 == value)
            .map_or(0.0, |a| a.1)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.support().map(|a| a.0.abs()).fold(0.0, f64::max)
    }
}

impl From<Vec<(f64, f64)>> for Pmf {
    fn from(atoms: Vec<(f64, f64)>) -> Self {
        Pmf::new(atoms)
    }
}

impl From<Pmf> for Vec<(f64, f64)> {
    fn from(pmf: Pmf) -> Self {
        pmf.atoms
    }
}
