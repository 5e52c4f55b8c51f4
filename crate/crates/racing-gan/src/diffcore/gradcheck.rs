//! Central finite-difference oracle for gradient verification.
//!
//! Deliberately independent of the tape's backward pass: it only re-evaluates
//! a scalar function while wiggling one parameter entry at a time.

use crate::error::Result;

use super::optim::ParameterSet;
use super::tensor::Tensor;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Worst guarded relative error between an analytic gradient and its central
/// finite-difference estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub entries: usize,
}

/// Guarded relative error: `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central finite differences of `f` with respect to every entry of `params`,
/// compared against `analytic` (one tensor per parameter, in set order).
///
/// `f` must be a pure function of the parameter values.
pub fn check_grads(
    params: &mut ParameterSet,
    analytic: &[Tensor],
    step: f64,
    mut f: impl FnMut(&ParameterSet) -> Result<f64>,
) -> Result<GradCheckReport> {
    let names: Vec<String> = params.names().map(String::from).collect();
    assert_eq!(names.len(), analytic.len(), "one analytic grad per parameter");

    let mut max_rel_err: f64 = 0.0;
    let mut entries = 0;
    for (name, grad) in names.iter().zip(analytic) {
        let len = params.value(name).expect("known name").len();
        assert_eq!(grad.len(), len, "analytic grad shape mismatch for {name}");
        for idx in 0..len {
            let original = params.value(name).unwrap().data()[idx];

            params.value_mut(name).unwrap().data_mut()[idx] = original + step;
            let plus = f(params)?;
            params.value_mut(name).unwrap().data_mut()[idx] = original - step;
            let minus = f(params)?;
            params.value_mut(name).unwrap().data_mut()[idx] = original;

            let numeric = (plus - minus) / (2.0 * step);
            max_rel_err = max_rel_err.max(rel_err(grad.data()[idx], numeric, 1e-6));
            entries += 1;
        }
    }
    Ok(GradCheckReport { max_rel_err, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_checks_out() {
        // f = mean(p^2) over a 1x3 parameter; df/dp = 2p/3.
        let mut ps = ParameterSet::new();
        ps.insert("p", Tensor::from_vec(1, 3, vec![0.5, -1.0, 2.0]).unwrap())
            .unwrap();

        let eval = |ps: &ParameterSet| -> Result<f64> {
            let p = ps.value("p").unwrap();
            Ok(p.data().iter().map(|x| x * x).sum::<f64>() / p.len() as f64)
        };

        let analytic = ps.value("p").unwrap().map(|x| 2.0 * x / 3.0);
        let report = check_grads(&mut ps, &[analytic], FD_STEP, eval).unwrap();
        assert!(report.max_rel_err < 1e-8, "rel err {}", report.max_rel_err);
        assert_eq!(report.entries, 3);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let mut ps = ParameterSet::new();
        ps.insert("p", Tensor::scalar(1.5)).unwrap();
        let eval = |ps: &ParameterSet| -> Result<f64> {
            Ok(ps.value("p").unwrap().item().powi(2))
        };
        let wrong = Tensor::scalar(1.0); // true grad is 3.0
        let report = check_grads(&mut ps, &[wrong], FD_STEP, eval).unwrap();
        assert!(report.max_rel_err > 0.1);
    }
}
