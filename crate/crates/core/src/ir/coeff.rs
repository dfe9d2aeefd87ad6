//! Exact scalars in Q(i, √2).
//!
//! Every coefficient that appears in a derivation is an element
//! `a + b·√2` where `a` and `b` are Gaussian rationals. The ring is closed
//! under the operations the engine needs (sums, products, negation and the
//! inverse of nonzero elements), so no floating point ever enters the
//! symbolic side.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = Ratio<i128>;

/// Gaussian rational `re + im·i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussQ {
    pub re: Q,
    pub im: Q,
}

impl GaussQ {
    pub const fn new(re: Q, im: Q) -> Self {
        GaussQ { re, im }
    }

    pub fn int(n: i128) -> Self {
        GaussQ::new(Q::from_integer(n), Q::zero())
    }

    pub fn i() -> Self {
        GaussQ::new(Q::zero(), Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussQ::new(self.re, -self.im)
    }

    pub fn norm_sqr(&self) -> Q {
        self.re * self.re + self.im * self.im
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(GaussQ::new(self.re / n, -self.im / n))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(q_f64(&self.re), q_f64(&self.im))
    }
}

fn q_f64(q: &Q) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

impl Add for GaussQ {
    type Output = GaussQ;
    fn add(self, o: GaussQ) -> GaussQ {
        GaussQ::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussQ {
    type Output = GaussQ;
    fn sub(self, o: GaussQ) -> GaussQ {
        GaussQ::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussQ {
    type Output = GaussQ;
    fn mul(self, o: GaussQ) -> GaussQ {
        GaussQ::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ::new(-self.re, -self.im)
    }
}

/// Element `rat + surd·√2` of Q(i, √2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coeff {
    pub rat: GaussQ,
    pub surd: GaussQ,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::int(1)
    }

    pub fn int(n: i128) -> Self {
        Coeff { rat: GaussQ::int(n), surd: GaussQ::default() }
    }

    pub fn frac(n: i128, d: i128) -> Self {
        Coeff { rat: GaussQ::new(Q::new(n, d), Q::zero()), surd: GaussQ::default() }
    }

    pub fn gauss(g: GaussQ) -> Self {
        Coeff { rat: g, surd: GaussQ::default() }
    }

    pub fn i() -> Self {
        Coeff::gauss(GaussQ::i())
    }

    pub fn sqrt2() -> Self {
        Coeff { rat: GaussQ::default(), surd: GaussQ::int(1) }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.surd.is_zero()
    }

    pub fn is_one(&self) -> bool {
        *self == Coeff::one()
    }

    /// Complex conjugation (√2 is real).
    pub fn conj(&self) -> Self {
        Coeff { rat: self.rat.conj(), surd: self.surd.conj() }
    }

    /// Multiplicative inverse, using (a + b√2)(a − b√2) = a² − 2b².
    pub fn inv(&self) -> Option<Self> {
        let conj2 = Coeff { rat: self.rat, surd: -self.surd };
        let n = *self * conj2;
        debug_assert!(n.surd.is_zero());
        let ninv = n.rat.inv()?;
        Some(conj2 * Coeff::gauss(ninv))
    }

    pub fn to_c64(&self) -> Complex64 {
        self.rat.to_c64() + self.surd.to_c64() * std::f64::consts::SQRT_2
    }

    /// True when the printed form would start with a minus sign; used by
    /// the printer to emit ` - ` instead of ` + -`.
    pub fn leads_negative(&self) -> bool {
        let neg = |g: &GaussQ| {
            (g.im.is_zero() && g.re.is_negative()) || (g.re.is_zero() && g.im.is_negative())
        };
        if self.surd.is_zero() {
            neg(&self.rat)
        } else {
            self.rat.is_zero() && neg(&self.surd)
        }
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, o: Coeff) -> Coeff {
        Coeff { rat: self.rat + o.rat, surd: self.surd + o.surd }
    }
}

impl AddAssign for Coeff {
    fn add_assign(&mut self, o: Coeff) {
        *self = *self + o;
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, o: Coeff) -> Coeff {
        Coeff { rat: self.rat - o.rat, surd: self.surd - o.surd }
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, o: Coeff) -> Coeff {
        let two = GaussQ::int(2);
        Coeff {
            rat: self.rat * o.rat + two * self.surd * o.surd,
            surd: self.rat * o.surd + self.surd * o.rat,
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { rat: -self.rat, surd: -self.surd }
    }
}

fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_gauss(g: &GaussQ) -> String {
    match (g.re.is_zero(), g.im.is_zero()) {
        (true, true) => "0".into(),
        (false, true) => fmt_q(&g.re),
        (true, false) => {
            if g.im == Q::one() {
                "i".into()
            } else if g.im == -Q::one() {
                "-i".into()
            } else {
                format!("{} i", fmt_q(&g.im))
            }
        }
        (false, false) => {
            let sign = if g.im.is_negative() { "-" } else { "+" };
            let im = g.im.abs();
            let imt = if im == Q::one() { "i".to_string() } else { format!("{} i", fmt_q(&im)) };
            format!("({} {} {})", fmt_q(&g.re), sign, imt)
        }
    }
}

/// Parser-compatible text: `3/2`, `-i`, `(1 + 2 i)`, `3 sqrt2`, `(1 + sqrt2)`.
impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            return write!(f, "{}", fmt_gauss(&self.rat));
        }
        let surd = if self.surd == GaussQ::int(1) {
            "sqrt2".to_string()
        } else {
            format!("{} sqrt2", fmt_gauss(&self.surd))
        };
        if self.rat.is_zero() {
            write!(f, "{surd}")
        } else {
            write!(f, "({} + {surd})", fmt_gauss(&self.rat))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(Coeff::sqrt2() * Coeff::sqrt2(), Coeff::int(2));
    }

    #[test]
    fn inverse_roundtrip() {
        let c = Coeff { rat: GaussQ::new(Q::new(3, 2), Q::new(-1, 5)), surd: GaussQ::int(2) };
        let inv = c.inv().unwrap();
        assert_eq!(c * inv, Coeff::one());
        assert!(Coeff::zero().inv().is_none());
    }

    #[test]
    fn numeric_value() {
        let c = Coeff::i() * Coeff::sqrt2() + Coeff::frac(1, 2);
        let v = c.to_c64();
        assert!((v.re - 0.5).abs() < 1e-15);
        assert!((v.im - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Coeff::frac(-3, 2).to_string(), "-3/2");
        assert_eq!((-Coeff::i()).to_string(), "-i");
        assert_eq!(Coeff::sqrt2().to_string(), "sqrt2");
        assert_eq!((Coeff::one() + Coeff::i()).to_string(), "(1 + i)");
    }
}
