use crate::error::{Error, Result};
use crate::mdp::{Mdp, Mrp, Pmf, Policy};

/// Return atoms closer than this are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Sorts `(value, prob)` atoms and merges runs whose values lie within
/// [`ATOM_MERGE_TOL`] of the run's first value, keeping that first value.
pub fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match out.last_mut() {
            Some(last) if v - last.0 <= ATOM_MERGE_TOL => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

fn cap_check(count: usize, cap: u128) -> Result<()> {
    if count as u128 > cap {
        return Err(Error::CapExceeded {
            what: "brute-force return atoms",
            count: count as u128,
            cap,
        });
    }
    Ok(())
}

/// Exact pmf of `Σ_{t=1}^{T} γ^{t−1} R_t` for an MRP, by forward propagation
/// of the joint law of (current state, partial return). `cap` bounds the
/// number of live (state, return) atoms at any step.
pub fn brute_force_return_pmf(mrp: &Mrp, horizon: usize, cap: u128) -> Result<Pmf> {
    let n = mrp.n_states();
    let gamma = mrp.gamma();
    let reward = mrp.reward();
    let mut live: Vec<Vec<(f64, f64)>> = mrp
        .initial()
        .iter()
        .map(|&m| if m > 0.0 { vec![(0.0, m)] } else { Vec::new() })
        .collect();
    let mut discount = 1.0;
    for _ in 0..horizon {
        let mut next: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
        for (x, atoms) in live.iter().enumerate() {
            if atoms.is_empty() {
                continue;
            }
            for (y, &p) in mrp.kernel()[x].iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                for (r, q) in reward.pmf(x, y).support() {
                    for &(g, w) in atoms {
                        next[y].push((g + discount * r, w * p * q));
                    }
                }
            }
        }
        live = next.into_iter().map(merge_atoms).collect();
        cap_check(live.iter().map(Vec::len).sum(), cap)?;
        discount *= gamma;
    }
    Ok(Pmf::new(merge_atoms(live.concat())))
}

/// Exact truncated-return pmf for `mdp` under `policy`, by enumerating every
/// path `(x₁, a₁, x₂, R₁, …)` directly on the MDP. Independent of MRP
/// induction; `cap` bounds the number of enumerated paths.
pub fn brute_force_return_pmf_policy(
    mdp: &Mdp,
    policy: &Policy,
    horizon: usize,
    cap: u128,
) -> Result<Pmf> {
    policy.check(mdp)?;
    struct Walk<'a> {
        mdp: &'a Mdp,
        policy: &'a Policy,
        horizon: usize,
        cap: u128,
        out: Vec<(f64, f64)>,
    }
    impl Walk<'_> {
        fn go(&mut self, x: usize, t: usize, ret: f64, prob: f64, discount: f64) -> Result<()> {
            if t == self.horizon {
                self.out.push((ret, prob));
                return cap_check(self.out.len(), self.cap);
            }
            for (a, pa) in self.policy.distribution(x) {
                let row = self.mdp.row(x, a).expect("policy checked");
                for (y, &p) in self.mdp.transition(x, a).iter().enumerate() {
                    if p <= 0.0 {
                        continue;
                    }
                    for (r, q) in self.mdp.reward().pmf(row, y).support() {
                        self.go(y, t + 1, ret + discount * r, prob * pa * p * q, discount * self.mdp.gamma())?;
                    }
                }
            }
            Ok(())
        }
    }
    let mut walk = Walk {
        mdp,
        policy,
        horizon,
        cap,
        out: Vec::new(),
    };
    for (x, &m) in mdp.initial().iter().enumerate() {
        if m > 0.0 {
            walk.go(x, 0, 0.0, m, 1.0)?;
        }
    }
    Ok(Pmf::new(merge_atoms(walk.out)))
}
