//! Unit groups and S-unit groups, with exact discrete logarithms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::abelian::{hnf_reduce, lattice_kernel, FgAbGroup, IntMatrix};
use crate::classgroup::class_group;
use crate::error::{Error, Result};
use crate::ideal::{element_valuation, is_principal, FracIdeal, Ideal, PrimeIdeal, SSet};
use crate::numfield::{
    embed_element, relative_norm_element, restrict_element, Automorphism, FieldElement, FieldKind,
    NumberField,
};

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Exact square root, if `x` is a square in its field.
pub fn sqrt(x: &FieldElement) -> Option<FieldElement> {
    let field = x.field();
    if x.is_zero() {
        return Some(x.clone());
    }
    let (base, g, m) = match field.kind() {
        FieldKind::Rational => {
            return rational_sqrt(&x.as_rational().expect("element of Q"))
                .map(|r| field.from_rational(&r));
        }
        FieldKind::Quadratic(d) => (NumberField::rational(), field.automorphism(1).clone(), d),
        FieldKind::Biquadratic(m1, m2) => (
            NumberField::quadratic(m1).expect("radicand"),
            field.automorphism(2).clone(),
            m2,
        ),
    };
    let down = |y: &FieldElement| restrict_element(field, &base, y).ok();
    let up = |y: &FieldElement| embed_element(&base, field, y).expect("subfield");
    let r = field.sqrt_of_radicand(m).expect("generating radicand");
    let gx = x.apply(&g);
    let n0 = up(&sqrt(&down(&x.mul(&gx))?)?);
    for n in [n0.clone(), n0.neg()] {
        let t2 = down(&x.add(&gx).add(&n.scale_int(&BigInt::from(2))))?;
        if t2.is_zero() {
            // y = v·√m
            let v = sqrt(&down(
                &x.scale(&BigRational::new(BigInt::one(), BigInt::from(m))),
            )?);
            if let Some(v) = v {
                let y = up(&v).mul(&r);
                if y.mul(&y) == *x {
                    return Some(y);
                }
            }
            continue;
        }
        if let Some(t) = sqrt(&t2) {
            let y = x.add(&n).div(&up(&t)).ok()?;
            if y.mul(&y) == *x {
                return Some(y);
            }
        }
    }
    None
}

/// Fundamental unit `> 1` of a real quadratic field, by continued fractions.
pub fn fundamental_unit(field: &NumberField) -> Result<FieldElement> {
    let FieldKind::Quadratic(d) = field.kind() else {
        return Err(Error::Precondition(format!("{} is not quadratic", field)));
    };
    if d < 0 {
        return Err(Error::Precondition(format!("{} is imaginary", field)));
    }
    let dd = BigInt::from(d);
    let s = dd.sqrt();
    let one_mod_four = d.rem_euclid(4) == 1;
    // expansion of (p + √d)/q
    let (mut p, mut q) = if one_mod_four {
        (BigInt::one(), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    let omega = field.basis_element(1);
    for _ in 0..100_000 {
        let a = (&p + &s).div_floor(&q);
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        let x = if one_mod_four {
            field.from_bigint(&(&h - &k))
        } else {
            field.from_bigint(&h)
        }
        .add(&omega.scale_int(&k));
        if x.norm().abs().is_one() {
            return Ok(x);
        }
        h2 = std::mem::replace(&mut h1, h);
        k2 = std::mem::replace(&mut k1, k);
        p = &a * &q - &p;
        q = (&dd - &p * &p) / &q;
        debug_assert!(q.is_positive());
    }
    Err(Error::Internal(format!(
        "continued fraction of {} did not close",
        field
    )))
}

/// Generator of the roots of unity and its order.
fn torsion(field: &NumberField) -> Result<(FieldElement, u32)> {
    let rads: Vec<i64> = match field.kind() {
        FieldKind::Rational => vec![],
        FieldKind::Quadratic(d) => vec![d],
        FieldKind::Biquadratic(..) => field
            .quadratic_subfields()
            .iter()
            .map(|k| k.radicands()[0])
            .collect(),
    };
    let has = |d: i64| rads.contains(&d);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let (z, w) = if has(-1) && has(2) {
        let s = field.sqrt_of_radicand(2)?.add(&field.sqrt_of_radicand(-2)?);
        (s.scale(&half), 8)
    } else if has(-1) && has(3) {
        let s = field.sqrt_of_radicand(3)?.add(&field.sqrt_of_radicand(-1)?);
        (s.scale(&half), 12)
    } else if has(-1) {
        (field.sqrt_of_radicand(-1)?, 4)
    } else if has(-3) {
        (
            field.one().add(&field.sqrt_of_radicand(-3)?).scale(&half),
            6,
        )
    } else {
        (field.from_int(-1), 2)
    };
    if !z.pow(w as u64).is_one()
        || [2u32, 3]
            .iter()
            .any(|&p| w % p == 0 && z.pow((w / p) as u64).is_one())
    {
        return Err(Error::Internal(format!(
            "root of unity of order {} failed to verify in {}",
            w, field
        )));
    }
    Ok((z, w))
}

/// `∏ gens_i^{e_i}`.
fn power_product(
    field: &NumberField,
    gens: &[FieldElement],
    exps: &[BigInt],
) -> Result<FieldElement> {
    let mut out = field.one();
    for (g, e) in gens.iter().zip(exps) {
        if !e.is_zero() {
            out = out.mul(&g.powi(e)?);
        }
    }
    Ok(out)
}

/// Unit group `μ × Z^r` with an explicit basis.
#[derive(Debug)]
pub struct UnitGroup {
    field: NumberField,
    torsion: FieldElement,
    w: u32,
    fundamental: Vec<FieldElement>,
    logs: Vec<Vec<f64>>,
    group: FgAbGroup,
}

fn unit_cache() -> &'static Mutex<HashMap<FieldKind, Arc<UnitGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<FieldKind, Arc<UnitGroup>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The unit group of `field` (cached).
pub fn unit_group(field: &NumberField) -> Result<Arc<UnitGroup>> {
    if let Some(u) = unit_cache().lock().expect("unit cache").get(&field.kind()) {
        return Ok(u.clone());
    }
    let u = Arc::new(compute_unit_group(field)?);
    Ok(unit_cache()
        .lock()
        .expect("unit cache")
        .entry(field.kind())
        .or_insert(u)
        .clone())
}

fn compute_unit_group(field: &NumberField) -> Result<UnitGroup> {
    let (z, w) = torsion(field)?;
    let fundamental = match field.kind() {
        FieldKind::Rational => vec![],
        FieldKind::Quadratic(d) if d < 0 => vec![],
        FieldKind::Quadratic(_) => vec![fundamental_unit(field)?],
        FieldKind::Biquadratic(..) => biquadratic_units(field, &z, w)?,
    };
    UnitGroup::new(field, z, w, fundamental)
}

/// Fundamental units of a biquadratic field from the subfield units, by
/// adjoining every square root of a product `ζ^a ∏ ε_i^{b_i}` with
/// `a, b_i ∈ {0, 1}`, one per independent square class. Every unit squares into the subgroup generated by
/// subfield units, so one round suffices.
fn biquadratic_units(field: &NumberField, z: &FieldElement, w: u32) -> Result<Vec<FieldElement>> {
    let mut base = vec![z.clone()];
    for k in field.quadratic_subfields() {
        if k.is_totally_real() {
            base.push(embed_element(&k, field, &fundamental_unit(&k)?)?);
        }
    }
    let m = base.len();
    let mut gens = base.clone();
    let mut rels = vec![{
        let mut r = vec![BigInt::zero(); m];
        r[0] = BigInt::from(w);
        r
    }];
    // square classes already accounted for, as an F2-span of masks
    let mut span: Vec<usize> = vec![0];
    for mask in 1usize..(1 << m) {
        if span.contains(&mask) {
            continue;
        }
        let prod = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .fold(field.one(), |acc, i| acc.mul(&base[i]));
        if let Some(s) = sqrt(&prod) {
            gens.push(s);
            let mut r: Vec<BigInt> = (0..m)
                .map(|i| BigInt::from(-((mask >> i & 1) as i64)))
                .collect();
            r.resize(gens.len(), BigInt::zero());
            r[gens.len() - 1] = BigInt::from(2);
            rels.push(r);
            let grown: Vec<usize> = span.iter().map(|x| x ^ mask).collect();
            span.extend(grown);
        }
    }
    let ng = gens.len();
    for r in rels.iter_mut() {
        r.resize(ng, BigInt::zero());
    }
    let g = FgAbGroup::from_presentation(ng, &IntMatrix::from_rows(rels, ng));
    if g.free_rank() != m - 1 || g.rank() != m || g.invariants()[0] != BigInt::from(w) {
        return Err(Error::Internal(format!(
            "unit group of {} has unexpected shape {}",
            field, g
        )));
    }
    (0..g.rank())
        .filter(|&i| g.invariants()[i].is_zero())
        .map(|i| power_product(field, &gens, g.from_canon().row(i)))
        .collect()
}

fn solve_f64(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    // solves x·a = b for square a
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut row: Vec<f64> = (0..n).map(|i| a[i][j]).collect();
            row.push(b[j]);
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[piv][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

impl UnitGroup {
    fn new(
        field: &NumberField,
        torsion: FieldElement,
        w: u32,
        fundamental: Vec<FieldElement>,
    ) -> Result<Self> {
        let r = fundamental.len();
        let mut rel = vec![BigInt::zero(); 1 + r];
        rel[0] = BigInt::from(w);
        let group = FgAbGroup::from_presentation(1 + r, &IntMatrix::from_rows(vec![rel], 1 + r));
        let logs = fundamental.iter().map(|u| u.log_vector()).collect();
        Ok(UnitGroup {
            field: field.clone(),
            torsion,
            w,
            fundamental,
            logs,
            group,
        })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// `Z/w ⊕ Z^r`; canonical coordinates throughout.
    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn torsion_order(&self) -> u32 {
        self.w
    }

    pub fn torsion_generator(&self) -> &FieldElement {
        &self.torsion
    }

    pub fn fundamental_units(&self) -> &[FieldElement] {
        &self.fundamental
    }

    pub fn rank(&self) -> usize {
        self.fundamental.len()
    }

    fn presentation_generators(&self) -> Vec<FieldElement> {
        let mut g = vec![self.torsion.clone()];
        g.extend(self.fundamental.iter().cloned());
        g
    }

    /// Canonical generators as elements.
    pub fn generators(&self) -> Vec<FieldElement> {
        let pg = self.presentation_generators();
        (0..self.group.rank())
            .map(|i| {
                power_product(&self.field, &pg, self.group.from_canon().row(i))
                    .expect("unit powers")
            })
            .collect()
    }

    pub fn element(&self, canon: &[BigInt]) -> Result<FieldElement> {
        power_product(
            &self.field,
            &self.presentation_generators(),
            &self.group.presentation_of(canon),
        )
    }

    /// For each embedding, `Σ_k |log|σ(η_k)||` over the fundamental units.
    pub fn embedding_spread(&self) -> Vec<f64> {
        (0..self.field.embedding_count())
            .map(|s| self.fundamental.iter().map(|u| u.log_abs_at(s).abs()).sum())
            .collect()
    }

    /// Presentation coordinates `(a, b_1, ..., b_r)` of a unit.
    fn log_presentation(&self, x: &FieldElement) -> Result<Vec<BigInt>> {
        if x.field() != &self.field {
            return Err(Error::FieldMismatch(format!(
                "unit of {} given for {}",
                x.field(),
                self.field
            )));
        }
        if x.is_zero() || !x.is_integral() || !x.norm().abs().is_one() {
            return Err(Error::Precondition(format!("{} is not a unit", x)));
        }
        let r = self.rank();
        let mut b = vec![BigInt::zero(); r];
        let mut y = x.clone();
        if r > 0 {
            let lx = x.log_vector();
            let a: Vec<Vec<f64>> = self.logs.iter().map(|l| l[..r].to_vec()).collect();
            let sol = solve_f64(&a, &lx[..r])
                .ok_or_else(|| Error::Internal("singular regulator matrix".into()))?;
            b = sol.iter().map(|v| BigInt::from(v.round() as i64)).collect();
            let neg: Vec<BigInt> = b.iter().map(|t| -t).collect();
            y = y.mul(&power_product(&self.field, &self.fundamental, &neg)?);
        }
        let mut t = self.field.one();
        for a in 0..self.w {
            if t == y {
                let mut out = vec![BigInt::from(a)];
                out.extend(b);
                return Ok(out);
            }
            t = t.mul(&self.torsion);
        }
        Err(Error::Internal(format!(
            "unit {} is outside the computed unit group",
            x
        )))
    }

    /// Canonical coordinates of a unit.
    pub fn discrete_log(&self, x: &FieldElement) -> Result<Vec<BigInt>> {
        Ok(self.group.canon_of(&self.log_presentation(x)?))
    }

    /// Action of an automorphism on canonical coordinates.
    pub fn galois_matrix(&self, sigma: &Automorphism) -> Result<IntMatrix> {
        let rows: Result<Vec<Vec<BigInt>>> = self
            .generators()
            .iter()
            .map(|g| self.discrete_log(&g.apply(sigma)))
            .collect();
        Ok(IntMatrix::from_rows(rows?, self.group.rank()))
    }
}

/// `S`-unit group for a finite set of primes, with an explicit basis.
#[derive(Clone, Debug)]
pub struct SUnitGroup {
    field: NumberField,
    primes: Vec<PrimeIdeal>,
    units: Arc<UnitGroup>,
    /// Generators beyond the units, one per row of `valuations`.
    s_gens: Vec<FieldElement>,
    valuations: IntMatrix,
    group: FgAbGroup,
}

/// `S`-units of `field`; `s` may live on `field` or on a subfield, in
/// which case it is lifted to the primes above.
pub fn s_unit_group(field: &NumberField, s: &SSet) -> Result<SUnitGroup> {
    let lifted = s.lift(field)?;
    let primes = lifted.primes();
    let units = unit_group(field)?;
    let k = primes.len();
    let mut s_gens = Vec::new();
    let valuations = if k == 0 {
        IntMatrix::zeros(0, 0)
    } else {
        let cl = class_group(field)?;
        let rows: Result<Vec<Vec<BigInt>>> =
            primes.iter().map(|p| cl.class_of(p.ideal())).collect();
        let m = IntMatrix::from_rows(rows?, cl.group().rank());
        let kern = lattice_kernel(&m, cl.group().invariants());
        for i in 0..kern.rows() {
            s_gens.push(generator_of_product(field, primes, kern.row(i))?);
        }
        kern
    };
    let r = units.rank();
    let n = 1 + r + k;
    let mut rel = vec![BigInt::zero(); n];
    rel[0] = BigInt::from(units.torsion_order());
    let group = FgAbGroup::from_presentation(n, &IntMatrix::from_rows(vec![rel], n));
    Ok(SUnitGroup {
        field: field.clone(),
        primes: primes.to_vec(),
        units,
        s_gens,
        valuations,
        group,
    })
}

/// A generator of `∏ P_i^{e_i}`, which must be principal.
fn generator_of_product(
    field: &NumberField,
    primes: &[PrimeIdeal],
    exps: &[BigInt],
) -> Result<FieldElement> {
    let mut pos = Ideal::unit(field);
    let mut neg = Ideal::unit(field);
    for (p, e) in primes.iter().zip(exps) {
        let k = e
            .abs()
            .to_u32()
            .ok_or_else(|| Error::Internal("exponent too large".into()))?;
        if e.is_positive() {
            pos = pos.mul(&p.ideal().pow(k));
        } else if e.is_negative() {
            neg = neg.mul(&p.ideal().pow(k));
        }
    }
    // pos/neg = pos·conj(neg)/N(neg)
    let target = pos.mul(&neg.conjugate_product());
    let g = is_principal(&target)?
        .ok_or_else(|| Error::Internal("relation lattice element is not principal".into()))?;
    let out = g.scale(&BigRational::new(BigInt::one(), neg.norm().clone()));
    debug_assert_eq!(
        FracIdeal::principal(&out)?,
        FracIdeal::new(pos.clone(), BigInt::one()).mul(&FracIdeal::integral(&neg).inverse())
    );
    Ok(out)
}

impl SUnitGroup {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn primes(&self) -> &[PrimeIdeal] {
        &self.primes
    }

    pub fn units(&self) -> &UnitGroup {
        &self.units
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    fn presentation_generators(&self) -> Vec<FieldElement> {
        let mut g = self.units.presentation_generators();
        g.extend(self.s_gens.iter().cloned());
        g
    }

    pub fn generators(&self) -> Vec<FieldElement> {
        let pg = self.presentation_generators();
        (0..self.group.rank())
            .map(|i| {
                power_product(&self.field, &pg, self.group.from_canon().row(i))
                    .expect("S-unit powers")
            })
            .collect()
    }

    pub fn element(&self, canon: &[BigInt]) -> Result<FieldElement> {
        power_product(
            &self.field,
            &self.presentation_generators(),
            &self.group.presentation_of(canon),
        )
    }

    /// Canonical coordinates of an `S`-unit.
    pub fn discrete_log(&self, x: &FieldElement) -> Result<Vec<BigInt>> {
        if x.is_zero() {
            return Err(Error::Precondition("zero is not an S-unit".into()));
        }
        let vals: Result<Vec<BigInt>> = self
            .primes
            .iter()
            .map(|p| element_valuation(x, p).map(BigInt::from))
            .collect();
        let vals = vals?;
        let mut y = x.clone();
        let mut t = vec![];
        if !self.primes.is_empty() {
            let (rem, coeffs) = hnf_reduce(&vals, &self.valuations);
            if rem.iter().any(|v| !v.is_zero()) {
                return Err(Error::Internal(
                    "valuations outside the principal lattice".into(),
                ));
            }
            let neg: Vec<BigInt> = coeffs.iter().map(|c| -c).collect();
            y = y.mul(&power_product(&self.field, &self.s_gens, &neg)?);
            t = coeffs;
        }
        let mut pres = self.units.log_presentation(&y).map_err(|e| match e {
            Error::Precondition(_) => Error::Precondition(format!("{} is not an S-unit", x)),
            other => other,
        })?;
        pres.extend(t);
        Ok(self.group.canon_of(&pres))
    }

    pub fn galois_matrix(&self, sigma: &Automorphism) -> Result<IntMatrix> {
        let rows: Result<Vec<Vec<BigInt>>> = self
            .generators()
            .iter()
            .map(|g| self.discrete_log(&g.apply(sigma)))
            .collect();
        Ok(IntMatrix::from_rows(rows?, self.group.rank()))
    }
}

/// `U_{sub,S} / N U_{field,S}` for `S` given on `sub`.
pub fn unit_norm_quotient(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<FgAbGroup> {
    if s.field() != sub {
        return Err(Error::FieldMismatch(format!(
            "S of {} given for {}",
            s.field(),
            sub
        )));
    }
    let big = s_unit_group(field, s)?;
    let small = s_unit_group(sub, s)?;
    let mut rows = Vec::new();
    for g in big.generators() {
        rows.push(small.discrete_log(&relative_norm_element(field, sub, &g)?)?);
    }
    let image = small.group().span(&rows);
    Ok(small.group().quotient(&image).group)
}

/// `(U_{sub,S} : N U_{field,S})` for `S` given on `sub`.
pub fn unit_norm_index(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<BigInt> {
    unit_norm_quotient(field, sub, s)?
        .order()
        .ok_or_else(|| Error::Internal("norm image has infinite index".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(d: i64) -> NumberField {
        NumberField::quadratic(d).unwrap()
    }

    #[test]
    fn real_quadratic_fundamental_units() {
        for (d, expect) in [
            (2i64, (1i64, 1i64, 1i64)),
            (3, (2, 1, 1)),
            (5, (1, 1, 2)),
            (13, (3, 1, 2)),
            (7, (8, 3, 1)),
        ] {
            let k = q(d);
            let e = fundamental_unit(&k).unwrap();
            // e = (a + b√d)/c
            let r = k.sqrt_of_radicand(d).unwrap();
            let want = k
                .from_int(expect.0)
                .add(&r.scale_int(&BigInt::from(expect.1)))
                .scale(&BigRational::new(BigInt::one(), BigInt::from(expect.2)));
            assert_eq!(e, want, "d = {}", d);
        }
        let e = fundamental_unit(&q(94)).unwrap();
        assert!(e.norm().abs().is_one());
    }

    #[test]
    fn square_roots() {
        let k = NumberField::biquadratic(-1, 5).unwrap();
        let x = k
            .sqrt_of_radicand(5)
            .unwrap()
            .add(&k.sqrt_of_radicand(-1).unwrap())
            .add(&k.from_int(3));
        let y = sqrt(&x.mul(&x)).unwrap();
        assert!(y == x || y == x.neg());
        assert!(sqrt(&k.from_int(-1)).is_some());
        assert!(sqrt(&k.from_int(2)).is_none());
        assert!(sqrt(&k.from_int(-5)).is_some());
        let qq = NumberField::rational();
        assert!(
            sqrt(&qq.from_rational(&BigRational::new(BigInt::from(9), BigInt::from(4)))).is_some()
        );
        assert!(sqrt(&qq.from_int(3)).is_none());
    }

    #[test]
    fn torsion_orders() {
        assert_eq!(unit_group(&q(-1)).unwrap().torsion_order(), 4);
        assert_eq!(unit_group(&q(-3)).unwrap().torsion_order(), 6);
        assert_eq!(unit_group(&q(-5)).unwrap().torsion_order(), 2);
        assert_eq!(
            unit_group(&NumberField::biquadratic(-1, 2).unwrap())
                .unwrap()
                .torsion_order(),
            8
        );
        assert_eq!(
            unit_group(&NumberField::biquadratic(-1, 3).unwrap())
                .unwrap()
                .torsion_order(),
            12
        );
        assert_eq!(
            unit_group(&NumberField::biquadratic(-1, 5).unwrap())
                .unwrap()
                .torsion_order(),
            4
        );
    }

    #[test]
    fn biquadratic_units_are_fundamental() {
        // Q(√2, √3): √(2+√3)·... the unit index [E : E1E2E3] is 2 here
        let k = NumberField::biquadratic(2, 3).unwrap();
        let u = unit_group(&k).unwrap();
        assert_eq!(u.rank(), 3);
        let k = NumberField::biquadratic(-1, 2).unwrap();
        let u = unit_group(&k).unwrap();
        assert_eq!(u.rank(), 1);
        for g in u.generators() {
            assert_eq!(
                u.discrete_log(&g)
                    .unwrap()
                    .iter()
                    .filter(|c| !c.is_zero())
                    .count(),
                1
            );
        }
    }

    #[test]
    fn saturation_leaves_no_hidden_squares() {
        for (a, b) in [(2, 3), (-1, 2), (-1, 3), (-1, 5), (5, -7), (-2, -3), (3, 5)] {
            let k = NumberField::biquadratic(a, b).unwrap();
            let u = unit_group(&k).unwrap();
            let mut gens = vec![u.torsion_generator().clone()];
            gens.extend(u.fundamental_units().iter().cloned());
            for mask in 1usize..(1 << gens.len()) {
                let prod = (0..gens.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .fold(k.one(), |acc, i| acc.mul(&gens[i]));
                assert!(sqrt(&prod).is_none(), "{} mask {}", k, mask);
            }
        }
    }

    #[test]
    fn galois_action_is_a_group_action() {
        for k in [
            NumberField::biquadratic(2, 3).unwrap(),
            NumberField::biquadratic(-1, 5).unwrap(),
            q(-1),
            q(7),
        ] {
            let u = unit_group(&k).unwrap();
            let g = u.group();
            let mats: Vec<IntMatrix> = k
                .automorphisms()
                .iter()
                .map(|s| u.galois_matrix(s).unwrap())
                .collect();
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    // σ_i ∘ σ_j acts as (row vector)·A_j·A_i
                    let prod = b.mul(a);
                    let want = &mats[i ^ j];
                    for r in 0..g.rank() {
                        assert_eq!(g.reduce(prod.row(r)), g.reduce(want.row(r)));
                    }
                }
            }
        }
    }

    #[test]
    fn discrete_log_roundtrip() {
        for k in [
            q(5),
            q(-1),
            NumberField::biquadratic(2, 3).unwrap(),
            NumberField::biquadratic(-1, 5).unwrap(),
        ] {
            let u = unit_group(&k).unwrap();
            let r = u.group().rank();
            for seed in 0..6i64 {
                let c: Vec<BigInt> = (0..r)
                    .map(|i| BigInt::from((seed * 7 + i as i64 * 3) % 5 - 2))
                    .collect();
                let x = u.element(&c).unwrap();
                assert_eq!(u.discrete_log(&x).unwrap(), u.group().reduce(&c));
            }
        }
    }

    #[test]
    fn s_unit_examples() {
        let k = q(-5);
        let s = s_unit_group(&k, &SSet::above_rational(&k, &[2])).unwrap();
        assert_eq!(s.group().invariants(), &[BigInt::from(2), BigInt::zero()]);
        let two = k.from_int(2);
        assert!(s.discrete_log(&two).is_ok());
        assert!(s.discrete_log(&k.from_int(3)).is_err());

        let qq = NumberField::rational();
        let s = s_unit_group(&qq, &SSet::above_rational(&qq, &[2, 5])).unwrap();
        assert_eq!(
            s.group().invariants(),
            &[BigInt::from(2), BigInt::zero(), BigInt::zero()]
        );
        assert!(s.discrete_log(&qq.from_int(-10)).is_ok());

        let gi = q(-1);
        let s = s_unit_group(&gi, &SSet::above_rational(&gi, &[2])).unwrap();
        assert_eq!(s.group().invariants(), &[BigInt::from(4), BigInt::zero()]);
        let one_plus_i = gi.one().add(&gi.sqrt_of_radicand(-1).unwrap());
        let c = s.discrete_log(&one_plus_i).unwrap();
        assert_eq!(s.element(&c).unwrap(), one_plus_i);
    }

    #[test]
    fn norm_indices() {
        let qq = NumberField::rational();
        let two = SSet::above_rational(&qq, &[2]);
        let inf = SSet::archimedean(&qq);
        assert_eq!(unit_norm_index(&q(-1), &qq, &two).unwrap(), BigInt::from(2));
        assert_eq!(unit_norm_index(&q(5), &qq, &inf).unwrap(), BigInt::one());
        assert_eq!(unit_norm_index(&q(3), &qq, &inf).unwrap(), BigInt::from(2));
        // N(2) = 4, N(√-5) = 5 inside <-1, 2, 5>
        let s = SSet::above_rational(&qq, &[2, 5]);
        assert_eq!(unit_norm_index(&q(-5), &qq, &s).unwrap(), BigInt::from(4));
    }
}
