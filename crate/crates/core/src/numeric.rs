//! Extended-range arithmetic for non-negative quantities.
//!
//! Hitting times on drifted trees span hundreds of orders of magnitude: the
//! return leg toward the root is linear in depth while the escape leg grows
//! geometrically. [`Magnitude`] keeps a double mantissa next to an unbounded
//! binary exponent, so values inside double range behave exactly like `f64`
//! and values outside it stay finite until they are reported.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;

/// Values above this (or positive values below its reciprocal) are reported
/// as `log:<natural log>`.
pub const REPORT_LIMIT: f64 = 1e300;

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Stable `ln Σ exp(x_i)`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (mant, raw - 1022)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// A non-negative real `mant · 2^exp` with `mant ∈ [0.5, 1)` (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    mant: f64,
    exp: i64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude { mant: 0.0, exp: 0 };
    pub const ONE: Magnitude = Magnitude { mant: 0.5, exp: 1 };

    /// Panics on negative, NaN or infinite input.
    pub fn new(value: f64) -> Self {
        assert!(
            value >= 0.0 && value.is_finite(),
            "magnitude of invalid value {value}"
        );
        if value == 0.0 {
            return Self::ZERO;
        }
        let (mant, exp) = frexp(value);
        Magnitude { mant, exp }
    }

    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan() && ln != f64::INFINITY, "invalid log {ln}");
        if ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (ln / LN_2).floor();
        let r = ln - e * LN_2;
        let (mant, k) = frexp(r.exp());
        Magnitude {
            mant,
            exp: e as i64 + k,
        }
    }

    fn normalized(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return Self::ZERO;
        }
        let (m, k) = frexp(mant);
        Magnitude {
            mant: m,
            exp: exp + k,
        }
    }

    pub fn ln(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.ln() + self.exp as f64 * LN_2
        }
    }

    /// Plain value; saturates to `inf` or `0` outside double range.
    pub fn value(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    /// True when the plain value prints faithfully as a decimal.
    pub fn is_reportable(self) -> bool {
        self.is_zero() || {
            let v = self.value();
            (1.0 / REPORT_LIMIT..=REPORT_LIMIT).contains(&v)
        }
    }

    pub fn add(self, other: Magnitude) -> Magnitude {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let shift = lo.exp - hi.exp;
        if shift < -1100 {
            return hi;
        }
        Self::normalized(hi.mant + ldexp(lo.mant, shift), hi.exp)
    }

    /// Difference clamped at zero.
    pub fn saturating_sub(self, other: Magnitude) -> Magnitude {
        if other.is_zero() {
            return self;
        }
        if other >= self {
            return Self::ZERO;
        }
        let shift = other.exp - self.exp;
        if shift < -1100 {
            return self;
        }
        Self::normalized(self.mant - ldexp(other.mant, shift), self.exp)
    }

    pub fn mul(self, other: Magnitude) -> Magnitude {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mant * other.mant, self.exp + other.exp)
    }

    /// Panics on division by zero.
    pub fn div(self, other: Magnitude) -> Magnitude {
        assert!(!other.is_zero(), "division by zero magnitude");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mant / other.mant, self.exp - other.exp)
    }

    pub fn scale(self, factor: f64) -> Magnitude {
        self.mul(Magnitude::new(factor))
    }

    pub fn square(self) -> Magnitude {
        self.mul(self)
    }

    /// `|a - b| / max(a, b)`.
    pub fn rel_diff(self, other: Magnitude) -> f64 {
        let (hi, lo) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        if hi.is_zero() {
            return 0.0;
        }
        hi.saturating_sub(lo).div(hi).value()
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self
                .exp
                .cmp(&other.exp)
                .then(self.mant.partial_cmp(&other.mant)?),
        })
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_reportable() {
            f.write_str(&fmt_real(self.value()))
        } else {
            write!(f, "log:{}", self.ln())
        }
    }
}

/// Shortest round-trip text for `v`, in exponent form outside
/// `[1e-5, 1e16)` so huge values do not print hundreds of digits.
pub fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Compensated (Neumaier) sum of magnitudes.
///
/// The running total lives at a power-of-two scale that only moves when a
/// term would overflow it, so sums of ordinary doubles are plain Neumaier
/// sums and no precision is lost to rescaling.
#[derive(Debug, Clone, Copy, Default)]
pub struct MagnitudeSum {
    scale: Option<i64>,
    sum: f64,
    comp: f64,
}

impl MagnitudeSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, term: Magnitude) {
        if term.is_zero() {
            return;
        }
        let scale = match self.scale {
            None => {
                let s = if term.exp.abs() <= 900 { 0 } else { term.exp };
                self.scale = Some(s);
                s
            }
            Some(s) if term.exp > s + 900 => {
                let f = ldexp(1.0, s - term.exp);
                self.sum *= f;
                self.comp *= f;
                self.scale = Some(term.exp);
                term.exp
            }
            Some(s) => s,
        };
        let x = ldexp(term.mant, term.exp - scale);
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> Magnitude {
        match self.scale {
            None => Magnitude::ZERO,
            Some(s) => {
                let v = self.sum + self.comp;
                if v <= 0.0 {
                    Magnitude::ZERO
                } else {
                    Magnitude::normalized(v, s)
                }
            }
        }
    }
}

impl FromIterator<Magnitude> for MagnitudeSum {
    fn from_iter<I: IntoIterator<Item = Magnitude>>(iter: I) -> Self {
        let mut acc = MagnitudeSum::new();
        for m in iter {
            acc.push(m);
        }
        acc
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
