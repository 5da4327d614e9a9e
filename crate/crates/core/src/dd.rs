//! Minimal double-double arithmetic (~31 significant digits).
//!
//! Used by the exact-oracle residual check: the identity being verified
//! combines terms that grow like r^{-q} near the origin, and the residual
//! bound is absolute, so plain f64 ulps of the large terms would dominate
//! the report. Only the handful of operations needed there are provided.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: 6.931471805599453e-1, lo: 2.3190468138462996e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul(Dd::from(q2)));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }

    pub fn scale(self, k: f64) -> Dd {
        self.mul(Dd::from(k))
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    /// exp(self) via argument reduction exp(x) = 2^k exp(s), s = x - k ln 2,
    /// followed by Taylor on s/256 and 8 squarings.
    pub fn exp(self) -> Dd {
        if self.hi.abs() > 700.0 {
            // Out of double range anyway; fall back to f64 semantics.
            return Dd::from(self.hi.exp());
        }
        let k = (self.hi / LN2.hi).round();
        let s = self.sub(LN2.mul(Dd::from(k)));
        let t = s.scale(1.0 / 256.0);
        // Taylor sum of exp(t) - 1 with |t| <= ln2/512.
        let mut term = t;
        let mut sum = t;
        for n in 2..=12 {
            term = term.mul(t).scale(1.0 / n as f64);
            sum = sum.add(term);
        }
        // (1+m)^256 - via repeated squaring of (1+m): track m = exp-1 to
        // preserve precision: (1+m)^2 = 1 + (2m + m^2).
        let mut m = sum;
        for _ in 0..8 {
            m = m.scale(2.0).add(m.mul(m));
        }
        let e = Dd::ONE.add(m);
        // Multiply by 2^k exactly.
        let f = (2.0f64).powi(k as i32);
        Dd { hi: e.hi * f, lo: e.lo * f }
    }

    /// Natural logarithm via one Newton refinement of the f64 value:
    /// y1 = y0 + x exp(-y0) - 1.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of a non-positive double-double");
        let y0 = Dd::from(self.hi.ln());
        let r = self.mul(y0.neg().exp());
        // r ~ 1; ln r = (r-1) - (r-1)^2/2 + (r-1)^3/3 with r-1 ~ 1e-16.
        let s = r.sub(Dd::ONE);
        let corr = s.sub(s.mul(s).scale(0.5));
        y0.add(corr)
    }

    /// self^y for real y (self > 0).
    pub fn powf(self, y: f64) -> Dd {
        if y == 0.0 {
            return Dd::ONE;
        }
        self.ln().mul(Dd::from(y)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) -> bool {
        ((a.to_f64() - b) / b.abs().max(1e-300)).abs() < tol
    }

    #[test]
    fn basic_arithmetic_matches_f64() {
        let a = Dd::from(3.75);
        let b = Dd::from(1.25);
        assert_eq!(a.add(b).to_f64(), 5.0);
        assert_eq!(a.mul(b).to_f64(), 4.6875);
        assert_eq!(a.div(b).to_f64(), 3.0);
    }

    #[test]
    fn add_tracks_sub_ulp_parts() {
        let a = Dd::from(1.0);
        let tiny = Dd::from(1e-25);
        let s = a.add(tiny).sub(a);
        assert!((s.to_f64() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn exp_and_ln_agree_with_f64() {
        for &x in &[0.1, 1.0, -2.5, 10.0, -30.0, 0.5 * std::f64::consts::LN_2] {
            assert!(close(Dd::from(x).exp(), x.exp(), 1e-14), "exp({x})");
        }
        for &x in &[1e-8, 0.3, 1.0, 7.5, 1e12] {
            assert!(close(Dd::from(x).ln(), x.ln(), 1e-14), "ln({x})");
        }
    }

    #[test]
    fn exp_ln_roundtrip_to_dd_precision() {
        for &x in &[1e-9, 2.0e-4, 0.77, 3.0, 5.0e7] {
            let r = Dd::from(x).ln().exp();
            let err = r.sub(Dd::from(x)).abs().to_f64() / x;
            assert!(err < 1e-26, "roundtrip {x}: rel err {err}");
        }
    }

    #[test]
    fn powf_known_values() {
        // 2^10 and integer-root cases are exactly representable.
        assert!((Dd::from(2.0).powf(10.0).to_f64() - 1024.0).abs() < 1e-23);
        let r = Dd::from(9.0).powf(0.5);
        assert!(r.sub(Dd::from(3.0)).abs().to_f64() < 1e-26);
        // Cross-check a generic power against f64 at its own precision.
        assert!(close(Dd::from(0.03).powf(-2.0), 0.03f64.powi(-2), 1e-13));
    }

    #[test]
    fn known_identity_cancels_to_dd_precision() {
        // (N-1)/r - ((N-1)/r - lam r^-q) - lam r^-q at a deep node: the kind
        // of expression the oracle residual evaluates. Must cancel far below
        // the f64 ulp of the large term.
        let (nm1, lam, q, r) = (2.0, 2.0, 2.0, 3.0e-4);
        let a = Dd::from(nm1).div(Dd::from(r));
        let b = Dd::from(lam).mul(Dd::from(r).powf(-q));
        let hp = a.sub(b);
        let res = a.sub(hp).sub(b).abs().to_f64();
        assert!(res < 1e-12, "residual {res}");
    }
}
