//! Binary quadratic forms: reduction, cycles of indefinite forms and class
//! number counts.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `a x² + b xy + c y²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

/// 2×2 integer matrix `[[m00, m01], [m10, m11]]` acting on column vectors.
pub type Mat2 = [[BigInt; 2]; 2];

fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            &x[0][0] * &y[0][0] + &x[0][1] * &y[1][0],
            &x[0][0] * &y[0][1] + &x[0][1] * &y[1][1],
        ],
        [
            &x[1][0] * &y[0][0] + &x[1][1] * &y[1][0],
            &x[1][0] * &y[0][1] + &x[1][1] * &y[1][1],
        ],
    ]
}

fn identity2() -> Mat2 {
    [
        [BigInt::one(), BigInt::zero()],
        [BigInt::zero(), BigInt::one()],
    ]
}

impl Form {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Form {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c).is_one()
    }

    /// `f(M (x, y)ᵀ)` as a form in `(x, y)`.
    pub fn transform(&self, m: &Mat2) -> Form {
        let (p, q, r, s) = (&m[0][0], &m[0][1], &m[1][0], &m[1][1]);
        Form {
            a: self.eval(p, r),
            b: BigInt::from(2) * &self.a * p * q
                + &self.b * (p * s + q * r)
                + BigInt::from(2) * &self.c * r * s,
            c: self.eval(q, s),
        }
    }

    /// Reduced in the sense of positive definite forms.
    pub fn is_reduced_definite(&self) -> bool {
        let b_abs = self.b.abs();
        b_abs <= self.a
            && self.a <= self.c
            && !((b_abs == self.a || self.a == self.c) && self.b.is_negative())
    }

    /// Reduces a positive definite form, returning the reduced form and `M`
    /// with `self ∘ M` equal to it.
    pub fn reduce_definite(&self) -> (Form, Mat2) {
        let mut f = self.clone();
        let mut m = identity2();
        loop {
            // normalize b into (-a, a]
            let two_a = BigInt::from(2) * &f.a;
            let t = (&f.a - &f.b).div_floor(&two_a);
            if !t.is_zero() {
                let step: Mat2 = [[BigInt::one(), t.clone()], [BigInt::zero(), BigInt::one()]];
                f = f.transform(&step);
                m = mat_mul(&m, &step);
            }
            if f.a > f.c || (f.a == f.c && f.b.is_negative()) {
                let step: Mat2 = [
                    [BigInt::zero(), -BigInt::one()],
                    [BigInt::one(), BigInt::zero()],
                ];
                f = f.transform(&step);
                m = mat_mul(&m, &step);
                continue;
            }
            return (f, m);
        }
    }

    /// Reduced in the sense of indefinite forms: `0 < b < √D` and
    /// `√D - b < 2|a| < √D + b`.
    pub fn is_reduced_indefinite(&self) -> bool {
        let d = self.discriminant();
        if !self.b.is_positive() || &self.b * &self.b >= d {
            return false;
        }
        let two_a = BigInt::from(2) * self.a.abs();
        let s = &two_a + &self.b;
        if &s * &s <= d {
            return false;
        }
        let t = &two_a - &self.b;
        !t.is_positive() || &t * &t < d
    }

    /// One reduction step for indefinite forms, with its matrix.
    pub fn rho(&self) -> (Form, Mat2) {
        let d = self.discriminant();
        let c_abs = self.c.abs();
        let two_c = BigInt::from(2) * &c_abs;
        let nb = -&self.b;
        let r = if &c_abs * &c_abs > d {
            // r ≡ -b (mod 2|c|), -|c| < r ≤ |c|
            let mut r = nb.mod_floor(&two_c);
            if r > c_abs {
                r -= &two_c;
            }
            r
        } else {
            let s = d.sqrt();
            &s - (&s - &nb).mod_floor(&two_c)
        };
        let t = (&r + &self.b) / (BigInt::from(2) * &self.c);
        let m: Mat2 = [[BigInt::zero(), -BigInt::one()], [BigInt::one(), t]];
        let next = Form {
            a: self.c.clone(),
            b: r.clone(),
            c: (&r * &r - &d) / (BigInt::from(4) * &self.c),
        };
        debug_assert_eq!(self.transform(&m), next);
        (next, m)
    }

    /// Reduces an indefinite form, returning the reduced form and `M` with
    /// `self ∘ M` equal to it.
    pub fn reduce_indefinite(&self) -> (Form, Mat2) {
        let mut f = self.clone();
        let mut m = identity2();
        let mut guard = 0u64;
        while !f.is_reduced_indefinite() {
            let (g, step) = f.rho();
            f = g;
            m = mat_mul(&m, &step);
            guard += 1;
            assert!(guard < 1_000_000, "indefinite reduction did not terminate");
        }
        (f, m)
    }

    /// The cycle of a reduced indefinite form under `rho`, with the
    /// accumulated matrices.
    pub fn cycle(&self) -> Vec<(Form, Mat2)> {
        let mut out = vec![(self.clone(), identity2())];
        let mut f = self.clone();
        let mut m = identity2();
        loop {
            let (g, step) = f.rho();
            m = mat_mul(&m, &step);
            if g == *self {
                return out;
            }
            out.push((g.clone(), m.clone()));
            f = g;
            assert!(out.len() < 10_000_000, "cycle did not close");
        }
    }
}

/// Finds `(x, y)` with `f(x, y) = ±1` for an indefinite form, or `None`
/// when the form represents neither.
pub fn represents_unit_indefinite(f: &Form) -> Option<(BigInt, BigInt, BigInt)> {
    let (red, m0) = f.reduce_indefinite();
    for (g, m) in red.cycle() {
        if g.a.abs().is_one() {
            let total = mat_mul(&m0, &m);
            let (x, y) = (total[0][0].clone(), total[1][0].clone());
            let v = f.eval(&x, &y);
            debug_assert!(v.abs().is_one());
            return Some((x, y, v));
        }
    }
    None
}

/// Finds `(x, y)` with `f(x, y) = 1` for a positive definite form.
pub fn represents_one_definite(f: &Form) -> Option<(BigInt, BigInt)> {
    let (red, m) = f.reduce_definite();
    if red.a.is_one() {
        Some((m[0][0].clone(), m[1][0].clone()))
    } else {
        None
    }
}

/// Class number of the negative discriminant `d`, counting reduced
/// primitive positive definite forms.
pub fn class_number_definite(d: i64) -> u64 {
    assert!(d < 0 && d.rem_euclid(4) <= 1, "bad discriminant {}", d);
    let dd = d.unsigned_abs() as i64;
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= dd {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

/// All reduced primitive indefinite forms of discriminant `d`.
pub fn reduced_indefinite_forms(d: i64) -> Vec<Form> {
    assert!(d > 0 && d.rem_euclid(4) <= 1, "bad discriminant {}", d);
    let s = (d as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for b in 1..=s {
        if b * b >= d || (b - d).rem_euclid(2) != 0 {
            continue;
        }
        let n = (b * b - d) / 4; // = a c < 0
        let m = n.abs();
        for a in 1..=m {
            if m % a != 0 {
                continue;
            }
            for sign in [1i64, -1] {
                let f = Form::new(sign * a, b, n / (sign * a));
                if f.is_reduced_indefinite() && f.is_primitive() {
                    out.push(f);
                }
            }
        }
    }
    out.sort();
    out
}

/// `(h⁺, h)` for a positive fundamental discriminant: the number of cycles
/// of reduced forms, and the wide class number (halved unless the
/// principal cycle contains a form with `a = -1`).
pub fn class_numbers_indefinite(d: i64) -> (u64, u64) {
    let forms = reduced_indefinite_forms(d);
    let mut seen: HashSet<Form> = HashSet::new();
    let mut cycles = 0u64;
    for f in &forms {
        if seen.contains(f) {
            continue;
        }
        cycles += 1;
        for (g, _) in f.cycle() {
            seen.insert(g);
        }
    }
    let principal = Form::new(1, d.rem_euclid(2), (d.rem_euclid(2) - d) / 4);
    let (p, _) = principal.reduce_indefinite();
    let minus_one = p.cycle().iter().any(|(g, _)| g.a == -BigInt::one());
    let h = if minus_one { cycles } else { cycles / 2 };
    (cycles, h)
}

pub fn to_i64(v: &BigInt) -> i64 {
    v.to_i64().expect("value fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definite_class_numbers() {
        assert_eq!(class_number_definite(-3), 1);
        assert_eq!(class_number_definite(-4), 1);
        assert_eq!(class_number_definite(-20), 2);
        assert_eq!(class_number_definite(-23), 3);
        assert_eq!(class_number_definite(-84), 4);
        assert_eq!(class_number_definite(-163), 1);
    }

    #[test]
    fn indefinite_class_numbers() {
        // (narrow, wide)
        assert_eq!(class_numbers_indefinite(5), (1, 1));
        assert_eq!(class_numbers_indefinite(12), (2, 1));
        assert_eq!(class_numbers_indefinite(40), (2, 2));
        assert_eq!(class_numbers_indefinite(60), (4, 2));
        assert_eq!(class_numbers_indefinite(229), (3, 3));
    }

    #[test]
    fn rho_preserves_discriminant() {
        let f = Form::new(3, 7, -5);
        let (g, m) = f.rho();
        assert_eq!(g.discriminant(), f.discriminant());
        assert_eq!(f.transform(&m), g);
    }

    #[test]
    fn unit_representation() {
        // x² - 3y² represents 1 but not -1
        let f = Form::new(1, 0, -3);
        let (x, y, v) = represents_unit_indefinite(&f).unwrap();
        assert_eq!(f.eval(&x, &y), v);
        assert!(v.abs().is_one());
        // 2x² + 2xy - y² (disc 12) represents -1
        let (_, _, v) = represents_unit_indefinite(&Form::new(2, 2, -1)).unwrap();
        assert_eq!(v, BigInt::from(-1));
        // 2x² + 4xy - 3y² (disc 40) represents neither, since the prime
        // above 2 in Q(√10) is not principal
        assert!(represents_unit_indefinite(&Form::new(2, 4, -3)).is_none());
        // 2x² + 2xy + 3y² (disc -20) does not represent 1
        assert!(represents_one_definite(&Form::new(2, 2, 3)).is_none());
        let g = Form::new(6, 14, 9); // equivalent to x² + 5y²
        let (x, y) = represents_one_definite(&g).unwrap();
        assert!(g.eval(&x, &y).is_one());
    }
}
