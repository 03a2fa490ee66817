//! Two-point boundary-value problems for `H` and the mean first-passage time.

use super::operator::{operator_matrix, Generator, OperatorKind};
use super::tridiag::TridiagonalLu;
use super::{Field, NumericError, RadialGrid};
use crate::analytic::{self, MeanFpt, MeanRegime};
use crate::model::{DriftSign, GridSpec, ProcessSpec};

/// Solves `L H = 0` with `H(a) = 1`, `H(r_max) = far_value`.
pub fn solve_hitting_profile(generator: &Generator, grid: &RadialGrid, far_value: f64) -> Result<Field, NumericError> {
    let n = grid.len();
    let op = operator_matrix(generator, grid, OperatorKind::Backward);
    let (mut lower, mut diag, mut upper) = (op.lower, op.diag, op.upper);
    let mut rhs = vec![0.0; n];
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = 1.0;
    diag[n - 1] = 1.0;
    lower[n - 1] = 0.0;
    rhs[n - 1] = far_value;
    let values = TridiagonalLu::factor(&lower, &diag, &upper)?.solve(&rhs);
    Ok(Field::stationary(*grid, values))
}

/// Hitting factor `H` on the grid, with the closed form as far boundary value.
///
/// Inward drift gives the constant 1.
pub fn solve_hitting_ode(spec: &ProcessSpec, grid: &GridSpec) -> Result<Field, NumericError> {
    let spec = spec.validate()?;
    let grid = grid.validate(&spec)?;
    let radial = RadialGrid::from_spec(&spec, &grid);
    if spec.drift_sign == DriftSign::Inward {
        return Ok(Field::stationary(radial, vec![1.0; radial.len()]));
    }
    let far = analytic::hitting_probability_at(&spec, grid.r_max);
    solve_hitting_profile(&Generator::from_spec(&spec), &radial, far)
}

/// Solves `L w = −h`, `w(a) = 0`, `w(r_max) = far_value`.
fn solve_weighted_mean(
    generator: &Generator,
    grid: &RadialGrid,
    h: &[f64],
    far_value: f64,
) -> Result<Vec<f64>, NumericError> {
    let n = grid.len();
    let op = operator_matrix(generator, grid, OperatorKind::Backward);
    let (mut lower, mut diag, mut upper) = (op.lower, op.diag, op.upper);
    let mut rhs: Vec<f64> = h.iter().map(|x| -x).collect();
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = 0.0;
    diag[n - 1] = 1.0;
    lower[n - 1] = 0.0;
    rhs[n - 1] = far_value;
    Ok(TridiagonalLu::factor(&lower, &diag, &upper)?.solve(&rhs))
}

fn mean_preconditions(spec: &ProcessSpec, conditioned: bool) -> Result<(), NumericError> {
    if !conditioned && analytic::is_transient(spec) {
        return Err(NumericError::Transient);
    }
    if analytic::conditioned_mean_regime(spec) == MeanRegime::Infinite {
        return Err(NumericError::InfiniteMean);
    }
    if spec.dimension > 2 {
        return Err(NumericError::Unsupported("conditioned mean for d > 4"));
    }
    Ok(())
}

fn weights(
    spec: &ProcessSpec,
    radial: &RadialGrid,
    conditioned: bool,
    hitting: Option<&Field>,
) -> Result<Vec<f64>, NumericError> {
    if !conditioned || spec.drift_sign == DriftSign::Inward {
        return Ok(vec![1.0; radial.len()]);
    }
    let h = hitting.ok_or(NumericError::MissingHitting)?;
    h.check_grid(radial)?;
    Ok(h.values.clone())
}

/// Mean first-passage time `T(r)`, or `T̃(r)` conditioned on hitting.
///
/// The conditioned mean solves `L(H·T̃) = −H` and divides by `H`. The outer
/// value comes from the closed form, which exists in every finite regime
/// handled here.
pub fn solve_mean_fpt_ode(
    spec: &ProcessSpec,
    grid: &GridSpec,
    conditioned: bool,
    hitting: Option<&Field>,
) -> Result<Field, NumericError> {
    let spec = spec.validate()?;
    let grid = grid.validate(&spec)?;
    mean_preconditions(&spec, conditioned)?;
    let radial = RadialGrid::from_spec(&spec, &grid);
    let h = weights(&spec, &radial, conditioned, hitting)?;
    let far_mean = match analytic::mean_fpt_at(&spec, grid.r_max, true) {
        Ok(MeanFpt::Finite(t)) => t,
        _ => return Err(NumericError::Unsupported("no far-field value for this regime")),
    };
    let w = solve_weighted_mean(&Generator::from_spec(&spec), &radial, &h, far_mean * h[h.len() - 1])?;
    let values = w.iter().zip(&h).map(|(w, h)| w / h).collect();
    Ok(Field::stationary(radial, values))
}

/// `|T(r0; r_max) − T(r0; 2·r_max)|` at equal spacing, a check that the
/// outer boundary is far enough not to matter.
pub fn mean_fpt_outer_sensitivity(spec: &ProcessSpec, grid: &GridSpec, conditioned: bool) -> Result<f64, NumericError> {
    let spec = spec.validate()?;
    let grid = grid.validate(&spec)?;
    let far_grid = GridSpec {
        r_max: 2.0 * grid.r_max - spec.target_radius,
        n_cells: 2 * grid.n_cells,
        ..grid
    };
    let at_r0 = |g: &GridSpec| -> Result<f64, NumericError> {
        let h = if conditioned {
            Some(solve_hitting_ode(&spec, g)?)
        } else {
            None
        };
        let t = solve_mean_fpt_ode(&spec, g, conditioned, h.as_ref())?;
        Ok(t.value_at(spec.start_radius).unwrap_or(f64::NAN))
    };
    Ok((at_r0(&grid)? - at_r0(&far_grid)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r_max: f64, n: usize) -> GridSpec {
        GridSpec {
            r_max,
            n_cells: n,
            dt: 0.01,
            t_end: 1.0,
        }
    }

    fn d3() -> ProcessSpec {
        ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0)
    }

    fn d2(sign: DriftSign) -> ProcessSpec {
        ProcessSpec::radial(2, 1.0, 4.0, sign, 1.0, 2.0)
    }

    #[test]
    fn hitting_at_two_in_three_dimensions() {
        let h = solve_hitting_ode(&d3(), &grid(20.0, 2000)).unwrap();
        let v = h.value_at(2.0).unwrap();
        assert!((v - 0.606531).abs() < 1e-4, "{v}");
        assert_eq!(h.values[0], 1.0);
        assert!(h.values.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn inward_hitting_is_one() {
        let h = solve_hitting_ode(&d3().mirrored(), &grid(20.0, 100)).unwrap();
        assert!(h.values.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn hitting_converges_at_second_order() {
        for spec in [
            d3(),
            d2(DriftSign::Outward),
            ProcessSpec::radial(4, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0),
        ] {
            let errs: Vec<f64> = [100, 200, 400]
                .iter()
                .map(|&n| {
                    let f = solve_hitting_ode(&spec, &grid(6.0, n)).unwrap();
                    f.max_error(|r| analytic::hitting_probability_at(&spec, r))
                })
                .collect();
            for w in errs.windows(2) {
                let ratio = w[0] / w[1];
                assert!((3.5..=4.5).contains(&ratio), "{spec:?} {errs:?}");
            }
        }
    }

    #[test]
    fn two_dimensional_means() {
        let g = grid(20.0, 2000);
        let t_minus = solve_mean_fpt_ode(&d2(DriftSign::Inward), &g, false, None).unwrap();
        assert!((t_minus.value_at(2.0).unwrap() - 0.75).abs() < 5e-3);
        assert_eq!(t_minus.values[0], 0.0);
        let plus = d2(DriftSign::Outward);
        let h = solve_hitting_ode(&plus, &g).unwrap();
        let t_plus = solve_mean_fpt_ode(&plus, &g, true, Some(&h)).unwrap();
        let v = t_plus.value_at(2.0).unwrap();
        assert!((v - 0.75).abs() < 5e-3, "{v}");
    }

    #[test]
    fn conditioned_mean_converges_at_second_order() {
        let plus = d2(DriftSign::Outward);
        let errs: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&n| {
                let g = grid(6.0, n);
                let h = solve_hitting_ode(&plus, &g).unwrap();
                let t = solve_mean_fpt_ode(&plus, &g, true, Some(&h)).unwrap();
                t.max_error(|r| analytic::mean_fpt_at(&plus, r, true).unwrap().finite().unwrap())
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn one_dimensional_mean_is_linear() {
        let spec = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Inward, 1.0);
        let t = solve_mean_fpt_ode(&spec, &grid(8.0, 200), false, None).unwrap();
        assert!(t.max_error(|x| x) < 1e-9);
        let plus = spec.mirrored();
        let g = grid(8.0, 400);
        let h = solve_hitting_ode(&plus, &g).unwrap();
        let tc = solve_mean_fpt_ode(&plus, &g, true, Some(&h)).unwrap();
        assert!((tc.value_at(1.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn error_cases() {
        let g = grid(10.0, 100);
        assert_eq!(
            solve_mean_fpt_ode(&d2(DriftSign::Outward), &g, false, None).unwrap_err(),
            NumericError::Transient
        );
        assert_eq!(
            solve_mean_fpt_ode(&d2(DriftSign::Outward), &g, true, None).unwrap_err(),
            NumericError::MissingHitting
        );
        let critical = ProcessSpec::radial(2, 1.0, 2.0, DriftSign::Inward, 1.0, 2.0);
        assert_eq!(
            solve_mean_fpt_ode(&critical, &g, false, None).unwrap_err(),
            NumericError::InfiniteMean
        );
        assert_eq!(
            solve_mean_fpt_ode(&d3(), &g, true, None).unwrap_err(),
            NumericError::InfiniteMean
        );
        let coarse = solve_hitting_ode(&d2(DriftSign::Outward), &grid(10.0, 50)).unwrap();
        assert!(matches!(
            solve_mean_fpt_ode(&d2(DriftSign::Outward), &g, true, Some(&coarse)),
            Err(NumericError::GridMismatch { .. })
        ));
    }

    #[test]
    fn outer_boundary_is_immaterial() {
        let spec = d2(DriftSign::Outward);
        let gap = mean_fpt_outer_sensitivity(&spec, &grid(10.0, 900), true).unwrap();
        assert!(gap < 1e-4, "{gap}");
        let gap = mean_fpt_outer_sensitivity(&spec.mirrored(), &grid(10.0, 900), false).unwrap();
        assert!(gap < 1e-4, "{gap}");
    }
}
