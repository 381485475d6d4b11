//! Horizon-tuned hyperparameters and their validity floors.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::Algorithm;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HyperParamError {
    #[error("{algorithm}: horizon T = {horizon} is too small (minimum admissible T: {minimum:.2}{strict})", strict = if *.strict { ", exclusive" } else { "" })]
    HorizonTooSmall {
        algorithm: Algorithm,
        horizon: u64,
        /// Smallest admissible horizon; exclusive when `strict`.
        minimum: f64,
        strict: bool,
    },
    #[error("alpha schedule c * T^(-1/3) = {alpha} must be below 1/2 (c = {c}, T = {horizon})")]
    ScheduleInvalid { alpha: f64, c: f64, horizon: u64 },
    #[error("{algorithm}: need at least {min} actions, got {actions}")]
    TooFewActions {
        algorithm: Algorithm,
        actions: usize,
        min: usize,
    },
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
}

/// TS-Borda exploration rate `alpha = c * T^(-1/3)`, which must stay below 1/2.
pub fn alpha_schedule(c: f64, horizon: u64) -> Result<f64, HyperParamError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(HyperParamError::OutOfRange {
            name: "c",
            value: c,
            expected: "c > 0",
        });
    }
    let alpha = c * (horizon.max(1) as f64).cbrt().recip();
    if alpha >= 0.5 {
        return Err(HyperParamError::ScheduleInvalid {
            alpha,
            c,
            horizon,
        });
    }
    Ok(alpha)
}

/// Parameters of the sparring exponential-weights learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exp3pParams {
    /// Optimism added to every importance-weighted estimate.
    pub beta: f64,
    pub eta: f64,
    /// Uniform exploration mixing.
    pub gamma: f64,
}

/// Smallest horizon for which the sparring learner's tuning is valid:
/// `max(4.41 A ln A, 0.95^2 ln A / (0.1^2 A))`.
pub fn exp3p_horizon_floor(actions: usize) -> f64 {
    let a = actions as f64;
    let ln_a = a.ln();
    (4.41 * a * ln_a).max(0.95 * 0.95 * ln_a / (0.1 * 0.1 * a))
}

/// Horizon-tuned sparring parameters:
/// `beta = sqrt(ln A / (A T))`, `eta = 0.95 beta`, `gamma = 1.05 sqrt(A ln A / T)`.
pub fn exp3p_hyperparams(actions: usize, horizon: u64) -> Result<Exp3pParams, HyperParamError> {
    if actions < 2 {
        return Err(HyperParamError::TooFewActions {
            algorithm: Algorithm::SparringExp3p,
            actions,
            min: 2,
        });
    }
    let floor = exp3p_horizon_floor(actions);
    if (horizon as f64) < floor {
        return Err(HyperParamError::HorizonTooSmall {
            algorithm: Algorithm::SparringExp3p,
            horizon,
            minimum: floor,
            strict: false,
        });
    }
    let a = actions as f64;
    let t = horizon as f64;
    let ln_a = a.ln();
    let base = (ln_a / (a * t)).sqrt();
    Ok(Exp3pParams {
        beta: base,
        eta: 0.95 * base,
        gamma: 1.05 * (a * ln_a / t).sqrt(),
    })
}

/// Parameters of the partial-monitoring forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmParams {
    pub eta: f64,
    pub gamma: f64,
}

/// Exclusive horizon floor `(e - 2) A^2 ln A` of the forecaster's tuning.
pub fn pm_horizon_floor(actions: usize) -> f64 {
    let a = actions as f64;
    (E - 2.0) * a * a * a.ln()
}

/// Horizon-tuned forecaster parameters:
/// `eta = (e-2)^(-1/4) (ln A / (A^(2/3) T))^(3/4)`,
/// `gamma = (e-2)^(1/4) (A^2 ln A / T)^(1/4)`.
pub fn pm_hyperparams(actions: usize, horizon: u64) -> Result<PmParams, HyperParamError> {
    if actions < 2 {
        return Err(HyperParamError::TooFewActions {
            algorithm: Algorithm::PartialMonitoring,
            actions,
            min: 2,
        });
    }
    let floor = pm_horizon_floor(actions);
    if horizon as f64 <= floor {
        return Err(HyperParamError::HorizonTooSmall {
            algorithm: Algorithm::PartialMonitoring,
            horizon,
            minimum: floor,
            strict: true,
        });
    }
    let a = actions as f64;
    let t = horizon as f64;
    let ln_a = a.ln();
    let e2 = E - 2.0;
    Ok(PmParams {
        eta: e2.powf(-0.25) * (ln_a / (a.powf(2.0 / 3.0) * t)).powf(0.75),
        gamma: e2.powf(0.25) * (a * a * ln_a / t).powf(0.25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values evaluated with 30-digit arithmetic (mpmath).
    const EXP3P_10_40000: (f64, f64, f64) = (
        0.002_399_262_956_094_040_6,
        0.002_279_299_808_289_338_5,
        0.025_192_261_038_987_426,
    );
    const PM_10_40000: (f64, f64) = (2.270_089_882_771_706_3e-4, 0.253_578_625_946_592_9);

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn alpha_schedule_examples() {
        assert!((alpha_schedule(1.0, 1000).unwrap() - 0.1).abs() < 1e-12);
        assert!((alpha_schedule(0.5, 40_000).unwrap() - 0.014_620_088_691_064_33).abs() < 1e-6);
        assert!(matches!(
            alpha_schedule(5.0, 8),
            Err(HyperParamError::ScheduleInvalid { .. })
        ));
        assert!(alpha_schedule(0.0, 10).is_err());
    }

    #[test]
    fn exp3p_closed_form() {
        let p = exp3p_hyperparams(10, 40_000).unwrap();
        assert!(rel(p.beta, EXP3P_10_40000.0) < 1e-12);
        assert!(rel(p.eta, EXP3P_10_40000.1) < 1e-12);
        assert!(rel(p.gamma, EXP3P_10_40000.2) < 1e-12);
    }

    #[test]
    fn exp3p_floor() {
        assert!((exp3p_horizon_floor(10) - 101.544_002_601_037_42).abs() < 1e-9);
        match exp3p_hyperparams(10, 101) {
            Err(HyperParamError::HorizonTooSmall { minimum, .. }) => {
                assert!((minimum - 101.544).abs() < 1e-3)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(exp3p_hyperparams(10, 102).is_ok());
        assert!(exp3p_hyperparams(1, 1000).is_err());
    }

    #[test]
    fn pm_closed_form() {
        let p = pm_hyperparams(10, 40_000).unwrap();
        assert!(rel(p.eta, PM_10_40000.0) < 1e-12);
        assert!(rel(p.gamma, PM_10_40000.1) < 1e-12);
    }

    #[test]
    fn pm_floor_is_exclusive() {
        assert!((pm_horizon_floor(10) - 165.390_503_077_830_38).abs() < 1e-9);
        assert!(matches!(
            pm_hyperparams(10, 165),
            Err(HyperParamError::HorizonTooSmall { strict: true, .. })
        ));
        assert!(pm_hyperparams(10, 166).is_ok());
    }

    #[test]
    fn floor_message_names_algorithm_and_minimum() {
        let msg = pm_hyperparams(10, 100).unwrap_err().to_string();
        assert!(msg.contains("PM"), "{msg}");
        assert!(msg.contains("165.39"), "{msg}");
    }

    #[test]
    fn exp3p_assumption_chain_holds_on_grid() {
        // 0 <= (1 + beta) A eta <= gamma <= 1/2 for every accepted (A, T).
        for a in 2..=64usize {
            let floor = exp3p_horizon_floor(a).ceil() as u64;
            let mut t = floor;
            while t <= 1_000_000 {
                let p = exp3p_hyperparams(a, t).unwrap();
                let lhs = (1.0 + p.beta) * a as f64 * p.eta;
                assert!(lhs >= 0.0);
                assert!(lhs <= p.gamma, "A={a} T={t}: {lhs} > {}", p.gamma);
                assert!(p.gamma <= 0.5, "A={a} T={t}: gamma {}", p.gamma);
                t = if t < 1000 { t + 1 } else { t + t / 7 };
            }
        }
    }
}
