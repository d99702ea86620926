use crate::error::{Error, Result};
use crate::evaluate::Cdf;

/// `sup_t |F(t) − G(t)|`, taken over the union of both grids and all jump
/// points, with left limits at every jump.
pub fn ks_distance(f: &dyn Cdf, g: &dyn Cdf) -> Result<f64> {
    let grid: Vec<f64> = f.grid_points().into_iter().chain(g.grid_points()).collect();
    if grid.is_empty() {
        return Err(Error::EmptySupport("KS distance needs evaluation points"));
    }
    let mut d = grid
        .iter()
        .map(|&t| (f.cdf(t) - g.cdf(t)).abs())
        .fold(0.0, f64::max);
    for t in f.jump_points().into_iter().chain(g.jump_points()) {
        d = d
            .max((f.cdf(t) - g.cdf(t)).abs())
            .max((f.cdf_left(t) - g.cdf_left(t)).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{NormalComponent, ReturnDistribution};

    fn step(at: f64) -> ReturnDistribution {
        ReturnDistribution::Analytic {
            components: vec![NormalComponent {
                weight: 1.0,
                mean: at,
                variance: 0.0,
            }],
        }
    }

    #[test]
    fn identical_is_zero() {
        let e = ReturnDistribution::empirical(vec![1.0, 2.0, 2.5], 1, 3).unwrap();
        assert_eq!(ks_distance(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_steps_are_one() {
        assert_eq!(ks_distance(&step(0.0), &step(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn left_limits_catch_coincident_jumps() {
        // both jump at 1; sup is the gap between them just below 1
        let a = ReturnDistribution::empirical(vec![0.0, 1.0], 1, 2).unwrap();
        let b = step(1.0);
        assert_eq!(ks_distance(&a, &b).unwrap(), 0.5);
    }
}
