//! Small numerical utilities: compensated summation, sign/log-magnitude
//! pairs for exponentially scaled quantities, and log-sum-exp.

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// A real number stored as `sign * exp(log_abs)`.
///
/// Eigenvector expansions carry factors like `exp(N F(xi))` that overflow
/// `f64` at modest `N`, so every exponentially scaled quantity in the
/// asymptotics modules is passed around in this form. `sign == 0` encodes an
/// exact zero (`log_abs = -inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSigned {
    pub log_abs: f64,
    pub sign: i8,
}

#[allow(clippy::should_implement_trait)] // mul/neg are plain value helpers
impl LogSigned {
    pub fn new(log_abs: f64, sign: i8) -> Self {
        debug_assert!(sign == -1 || sign == 0 || sign == 1);
        if sign == 0 {
            Self::zero()
        } else {
            Self { log_abs, sign }
        }
    }

    pub fn zero() -> Self {
        Self {
            log_abs: f64::NEG_INFINITY,
            sign: 0,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::zero()
        } else {
            Self {
                log_abs: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// `sign * exp(log_abs)`; may overflow to +-inf or underflow to 0.
    pub fn value(self) -> f64 {
        self.sign as f64 * self.log_abs.exp()
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::zero();
        }
        Self {
            log_abs: self.log_abs + other.log_abs,
            sign: self.sign * other.sign,
        }
    }

    /// Multiply by `exp(dlog)`.
    pub fn scale_log(self, dlog: f64) -> Self {
        if self.sign == 0 {
            return self;
        }
        Self {
            log_abs: self.log_abs + dlog,
            sign: self.sign,
        }
    }

    pub fn neg(self) -> Self {
        Self {
            log_abs: self.log_abs,
            sign: -self.sign,
        }
    }
}

/// log(sum(exp(x_i))) without overflow. Empty input yields -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() && m < 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add((x - m).exp());
    }
    m + acc.value().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        // 1 followed by many tiny values that naive summation drops.
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000_000 {
            k.add(1e-16);
        }
        let exact = 1.0 + 1e-16 * 1e7;
        assert!((k.value() - exact).abs() / exact < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let v = log_sum_exp(&[1000.0, 1000.0 + (2.0f64).ln()]);
        assert!((v - (1000.0 + (3.0f64).ln())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn logsigned_roundtrip(v in -1e6f64..1e6) {
            let ls = LogSigned::from_value(v);
            prop_assert!((ls.value() - v).abs() <= 1e-12 * v.abs());
        }

        #[test]
        fn logsigned_mul_matches_product(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let p = LogSigned::from_value(a).mul(LogSigned::from_value(b));
            let expect = a * b;
            if expect == 0.0 {
                prop_assert_eq!(p.sign, 0);
            } else {
                prop_assert!((p.value() - expect).abs() <= 1e-10 * expect.abs());
            }
        }
    }
}
