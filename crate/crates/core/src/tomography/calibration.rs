use super::TomographyError;
use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Assignment fidelities of one qubit's readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitFidelity {
    pub f_g: f64,
    pub f_e: f64,
}

impl QubitFidelity {
    pub fn new(f_g: f64, f_e: f64) -> Result<Self, TomographyError> {
        for (name, f) in [("f_g", f_g), ("f_e", f_e)] {
            if !(f > 0.5 && f <= 1.0) {
                return Err(TomographyError::InvalidParameter { name, reason: format!("must lie in (0.5, 1], got {f}") });
            }
        }
        Ok(Self { f_g, f_e })
    }

    /// Column-stochastic confusion matrix in `(g, e)` order.
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.f_g, 1.0 - self.f_e, 1.0 - self.f_g, self.f_e)
    }
}

/// Two-qubit readout calibration `F = F₁ ⊗ F₂`, acting on populations ordered
/// `(gg, ge, eg, ee)` with the first qubit as the most significant index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    pub q1: QubitFidelity,
    pub q2: QubitFidelity,
}

impl ReadoutCalibration {
    pub fn new(q1: QubitFidelity, q2: QubitFidelity) -> Self {
        Self { q1, q2 }
    }

    /// Q1: (0.983, 0.937), Q2: (0.990, 0.920).
    pub fn device() -> Self {
        Self { q1: QubitFidelity { f_g: 0.983, f_e: 0.937 }, q2: QubitFidelity { f_g: 0.990, f_e: 0.920 } }
    }

    pub fn identity() -> Self {
        let perfect = QubitFidelity { f_g: 1.0, f_e: 1.0 };
        Self { q1: perfect, q2: perfect }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        self.q1.matrix().kronecker(&self.q2.matrix())
    }

    /// `F·p`, the populations a readout with these fidelities would report.
    pub fn measure(&self, populations: &[f64; 4]) -> [f64; 4] {
        (self.matrix() * Vector4::from(*populations)).into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedPopulations {
    /// `F⁻¹·P_m`, possibly with small negative entries.
    pub raw: [f64; 4],
    /// `raw` with negatives set to zero and renormalised to unit sum.
    pub clamped: [f64; 4],
}

pub fn apply_calibration(measured: &[f64; 4], cal: &ReadoutCalibration) -> Result<CalibratedPopulations, TomographyError> {
    if measured.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(TomographyError::InvalidParameter { name: "measured", reason: "entries must be nonnegative".into() });
    }
    let total: f64 = measured.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(TomographyError::InvalidParameter { name: "measured", reason: format!("sums to {total}") });
    }
    let inv = cal.matrix().try_inverse().ok_or(TomographyError::Singular)?;
    let raw: [f64; 4] = (inv * Vector4::from(*measured)).into();
    let mut clamped = raw.map(|p| p.max(0.0));
    let s: f64 = clamped.iter().sum();
    clamped.iter_mut().for_each(|p| *p /= s);
    Ok(CalibratedPopulations { raw, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_a_no_op() {
        let m = [0.1, 0.2, 0.3, 0.4];
        let c = apply_calibration(&m, &ReadoutCalibration::identity()).unwrap();
        assert_eq!(c.raw, m);
        assert_eq!(c.clamped, m);
    }

    #[test]
    fn device_round_trip() {
        let cal = ReadoutCalibration::device();
        let p = [0.4, 0.1, 0.3, 0.2];
        let c = apply_calibration(&cal.measure(&p), &cal).unwrap();
        for k in 0..4 {
            assert!((c.raw[k] - p[k]).abs() < 1e-12);
        }
        let cols = cal.matrix().row_sum();
        assert!(cols.iter().all(|s| (s - 1.0).abs() < 1e-15));
    }

    #[test]
    fn pure_ground_readout_overshoots() {
        let c = apply_calibration(&[1.0, 0.0, 0.0, 0.0], &ReadoutCalibration::device()).unwrap();
        // F⁻¹ of each factor maps (1, 0) to (F_e, F_g − 1)/(F_g + F_e − 1)
        let d1 = 0.983 + 0.937 - 1.0;
        let d2 = 0.990 + 0.920 - 1.0;
        let expected = [0.937 * 0.920 / (d1 * d2), -0.937 * 0.010 / (d1 * d2), -0.017 * 0.920 / (d1 * d2), 0.017 * 0.010 / (d1 * d2)];
        for k in 0..4 {
            assert!((c.raw[k] - expected[k]).abs() < 1e-12);
        }
        assert!(c.raw[1] < 0.0 && c.raw[2] < 0.0);
        assert!((c.clamped[0] - expected[0] / (expected[0] + expected[3])).abs() < 1e-12);
        assert_eq!(c.clamped[1], 0.0);
    }

    #[test]
    fn fidelity_bounds() {
        assert!(QubitFidelity::new(0.5, 0.9).is_err());
        assert!(QubitFidelity::new(0.9, 1.01).is_err());
        assert!(QubitFidelity::new(0.983, 0.937).is_ok());
        assert!(apply_calibration(&[0.5, 0.5, 0.5, 0.0], &ReadoutCalibration::device()).is_err());
    }
}
