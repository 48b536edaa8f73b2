//! 2×2 matrices with entries stored as signed logarithms.
//!
//! Products of tens of thousands of contracting factors leave the double range,
//! and a common scale factor is not enough: `diag(λⁿ, δⁿ)` loses its small entry
//! long before a later rotation moves that entry into the dominant position.
//! Keeping every entry as `(sign, log|x|)` avoids both problems.

use std::f64::consts::{FRAC_PI_2, LN_2};

use crate::error::{Error, Result};
use crate::matrix::{det2, Matrix};

#[derive(Clone, Copy, Debug, PartialEq)]
struct SignedLog {
    sign: f64,
    log: f64,
}

impl SignedLog {
    const ZERO: SignedLog = SignedLog { sign: 0.0, log: f64::NEG_INFINITY };

    fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog { sign: x.signum(), log: x.abs().ln() }
        }
    }

    fn mul(self, other: SignedLog) -> Self {
        if self.sign == 0.0 || other.sign == 0.0 {
            return SignedLog::ZERO;
        }
        SignedLog { sign: self.sign * other.sign, log: self.log + other.log }
    }

    fn add(self, other: SignedLog) -> Self {
        if self.sign == 0.0 {
            return other;
        }
        if other.sign == 0.0 {
            return self;
        }
        let (hi, lo) = if self.log >= other.log { (self, other) } else { (other, self) };
        let ratio = (lo.log - hi.log).exp();
        if hi.sign == lo.sign {
            SignedLog { sign: hi.sign, log: hi.log + ratio.ln_1p() }
        } else if ratio >= 1.0 {
            SignedLog::ZERO
        } else {
            SignedLog { sign: hi.sign, log: hi.log + (-ratio).ln_1p() }
        }
    }
}

fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn log_hypot(x: SignedLog, y: SignedLog) -> f64 {
    0.5 * log_add(2.0 * x.log, 2.0 * y.log)
}

/// A 2×2 matrix with log-domain entries and an additively tracked `log|det|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogMatrix {
    e: [SignedLog; 4],
    log_abs_det: f64,
}

impl LogMatrix {
    pub fn identity() -> Self {
        let one = SignedLog { sign: 1.0, log: 0.0 };
        LogMatrix { e: [one, SignedLog::ZERO, SignedLog::ZERO, one], log_abs_det: 0.0 }
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::UnsupportedDimension(m.dim()));
        }
        let s = m.as_slice();
        Ok(LogMatrix {
            e: [
                SignedLog::from_f64(s[0]),
                SignedLog::from_f64(s[1]),
                SignedLog::from_f64(s[2]),
                SignedLog::from_f64(s[3]),
            ],
            log_abs_det: det2(s).abs().ln(),
        })
    }

    pub fn mul(&self, rhs: &LogMatrix) -> LogMatrix {
        let (a, b) = (&self.e, &rhs.e);
        LogMatrix {
            e: [
                a[0].mul(b[0]).add(a[1].mul(b[2])),
                a[0].mul(b[1]).add(a[1].mul(b[3])),
                a[2].mul(b[0]).add(a[3].mul(b[2])),
                a[2].mul(b[1]).add(a[3].mul(b[3])),
            ],
            log_abs_det: self.log_abs_det + rhs.log_abs_det,
        }
    }

    /// `m^k`.
    ///
    /// Diagonal matrices are powered entrywise. Scaled rotations `c·R_θ` become
    /// `cᵏ·R_{kθ}`, and when `kθ` lies within rounding distance of a multiple of
    /// `π/2` the quarter turn is produced with exact zeros. Everything else uses
    /// binary exponentiation in the log domain.
    pub fn pow(m: &Matrix, k: u64) -> Result<LogMatrix> {
        if m.dim() != 2 {
            return Err(Error::UnsupportedDimension(m.dim()));
        }
        if k == 0 {
            return Ok(LogMatrix::identity());
        }
        let s = m.as_slice();
        let kf = k as f64;
        if s[1] == 0.0 && s[2] == 0.0 {
            let a = SignedLog::from_f64(s[0]);
            let d = SignedLog::from_f64(s[3]);
            let pw = |x: SignedLog| {
                if x.sign == 0.0 {
                    SignedLog::ZERO
                } else {
                    let sign = if x.sign < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                    SignedLog { sign, log: kf * x.log }
                }
            };
            return Ok(LogMatrix {
                e: [pw(a), SignedLog::ZERO, SignedLog::ZERO, pw(d)],
                log_abs_det: kf * det2(s).abs().ln(),
            });
        }
        if let Some((c, theta)) = m.as_scaled_rotation() {
            let log_c = kf * c.ln();
            let angle = kf * theta;
            let quarters = angle / FRAC_PI_2;
            let nearest = quarters.round();
            let slack = 8.0 * f64::EPSILON * kf * (1.0 + quarters.abs());
            let rot = if slack < 1e-6 && (quarters - nearest).abs() <= slack {
                let turns = (nearest as i64).rem_euclid(4);
                let (cos, sin) = match turns {
                    0 => (1.0, 0.0),
                    1 => (0.0, 1.0),
                    2 => (-1.0, 0.0),
                    _ => (0.0, -1.0),
                };
                [cos, -sin, sin, cos]
            } else {
                let (sin, cos) = angle.sin_cos();
                [cos, -sin, sin, cos]
            };
            let entry = |x: f64| {
                let v = SignedLog::from_f64(x);
                if v.sign == 0.0 {
                    v
                } else {
                    SignedLog { sign: v.sign, log: v.log + log_c }
                }
            };
            return Ok(LogMatrix {
                e: [entry(rot[0]), entry(rot[1]), entry(rot[2]), entry(rot[3])],
                log_abs_det: 2.0 * log_c,
            });
        }
        let mut base = LogMatrix::from_matrix(m)?;
        let mut acc = LogMatrix::identity();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// `log ‖M‖` (operator norm), from `σ₁ = (‖(a+d, b−c)‖ + ‖(a−d, b+c)‖)/2`.
    pub fn log_norm(&self) -> f64 {
        let [a, b, c, d] = self.e;
        let neg = |x: SignedLog| SignedLog { sign: -x.sign, log: x.log };
        let h1 = log_hypot(a.add(d), b.add(neg(c)));
        let h2 = log_hypot(a.add(neg(d)), b.add(c));
        log_add(h1, h2) - LN_2
    }

    /// `log σ₂ = log|det| − log σ₁`.
    pub fn log_min_singular(&self) -> f64 {
        self.log_abs_det - self.log_norm()
    }

    /// Entry `(row, col)` as `(sign, log|x|)`.
    pub fn entry(&self, row: usize, col: usize) -> (f64, f64) {
        let x = self.e[row * 2 + col];
        (x.sign, x.log)
    }

    /// Converts back to an ordinary matrix (entries may under- or overflow).
    pub fn to_matrix(&self) -> Matrix {
        let v: Vec<f64> = self.e.iter().map(|x| x.sign * x.log.exp()).collect();
        Matrix::new(2, v.into_iter().map(|x| if x.is_nan() { 0.0 } else { x }).collect()).expect("finite entries")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn agrees_with_plain_product() {
        let a = Matrix::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.45]]).unwrap();
        let b = Matrix::from_rows(&[vec![-0.5, 0.25], vec![0.35, 0.05]]).unwrap();
        let plain = a.mul(&b).unwrap();
        let lm = LogMatrix::from_matrix(&a).unwrap().mul(&LogMatrix::from_matrix(&b).unwrap());
        let back = lm.to_matrix();
        for (x, y) in back.as_slice().iter().zip(plain.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((lm.log_norm() - plain.norm().ln()).abs() < 1e-13);
        assert!((lm.log_min_singular() - plain.min_singular().ln()).abs() < 1e-12);
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = Matrix::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.45]]).unwrap();
        let p = LogMatrix::pow(&a, 13).unwrap();
        let plain = a.pow(13);
        assert!((p.log_norm() - plain.norm().ln()).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_is_exact() {
        for k in [1u64, 2, 3, 4, 8, 16, 32] {
            let b2 = Matrix::rotation(PI / (2.0 * k as f64)).scale(0.4);
            let p = LogMatrix::pow(&b2, k).unwrap();
            assert_eq!(p.entry(0, 0).0, 0.0, "k={k}");
            assert_eq!(p.entry(1, 1).0, 0.0, "k={k}");
            assert_eq!(p.entry(0, 1).0, -1.0);
            assert!((p.entry(1, 0).1 - k as f64 * 0.4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_survives_huge_exponents() {
        // B₁ⁿ B₂ᵏ B₁ⁿ = λ^{n+k} δⁿ J
        let (lam, delta, k) = (0.4f64, 0.05f64, 4u64);
        let b1 = Matrix::diag(lam, delta);
        let b2 = Matrix::rotation(PI / 8.0).scale(lam);
        for n in [10u64, 1_000, 1_000_000] {
            let outer = LogMatrix::pow(&b1, n).unwrap();
            let w = outer.mul(&LogMatrix::pow(&b2, k).unwrap()).mul(&outer);
            let want = (n + k) as f64 * lam.ln() + n as f64 * delta.ln();
            assert!((w.log_norm() - want).abs() <= 1e-12 * want.abs(), "n={n}");
            assert!((w.log_min_singular() - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn cancellation_to_zero() {
        let a = SignedLog::from_f64(2.0);
        let b = SignedLog::from_f64(-2.0);
        assert_eq!(a.add(b).sign, 0.0);
    }
}
