//! Class groups from a Minkowski factor base, certified against an
//! independent class number.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abelian::{hnf_basis, FgAbGroup, GroupHom, IntMatrix, Quotient, Subgroup};
use crate::error::{Error, Result};
use crate::forms::{class_number_definite, class_numbers_indefinite};
use crate::ideal::{extend_ideal, primes_above, valuation, Ideal, PrimeIdeal, SSet};
use crate::numfield::{embed_element, primes_up_to, Automorphism, FieldKind, NumberField};
use crate::units::unit_group;

/// Minkowski bound, rounded outward.
pub fn minkowski_bound(field: &NumberField) -> u64 {
    let n = field.degree() as i32;
    let (_, r2) = field.signature();
    let fact: f64 = (1..=n).map(f64::from).product();
    let disc = field
        .discriminant()
        .abs()
        .to_f64()
        .expect("small discriminant");
    let m =
        fact / f64::from(n).powi(n) * (4.0 / std::f64::consts::PI).powi(r2 as i32) * disc.sqrt();
    (m * (1.0 + 1e-9)).ceil() as u64
}

/// Class number from binary quadratic forms for quadratic fields, and from
/// the subfield class numbers and the unit index for biquadratic fields.
pub fn class_number_oracle(field: &NumberField) -> Result<BigInt> {
    match field.kind() {
        FieldKind::Rational => Ok(BigInt::one()),
        FieldKind::Quadratic(_) => {
            let d = field.discriminant().to_i64().expect("small discriminant");
            Ok(BigInt::from(if d < 0 {
                class_number_definite(d)
            } else {
                class_numbers_indefinite(d).1
            }))
        }
        FieldKind::Biquadratic(..) => {
            let subs = field.quadratic_subfields();
            let hs = subs
                .iter()
                .map(class_number_oracle)
                .collect::<Result<Vec<_>>>()?;
            let q = subfield_unit_index(field)?;
            let num = q * hs.iter().product::<BigInt>();
            let den = BigInt::from(if field.is_totally_real() { 4 } else { 2 });
            if !num.is_multiple_of(&den) {
                return Err(Error::Internal(format!(
                    "class number formula is not integral for {}",
                    field
                )));
            }
            Ok(num / den)
        }
    }
}

/// `[E_K : E_1 E_2 E_3]` for a biquadratic field, subfield unit groups
/// including their roots of unity.
pub fn subfield_unit_index(field: &NumberField) -> Result<BigInt> {
    let u = unit_group(field)?;
    let mut rows = Vec::new();
    for k in field.quadratic_subfields() {
        let uk = unit_group(&k)?;
        for g in uk.generators() {
            rows.push(u.discrete_log(&embed_element(&k, field, &g)?)?);
        }
    }
    let span = u.group().span(&rows);
    u.group()
        .quotient(&span)
        .group
        .order()
        .ok_or_else(|| Error::Internal("subfield units of infinite index".into()))
}

/// Class group with a factor base of prime ideals and relations among them.
#[derive(Debug)]
pub struct ClassGroup {
    field: NumberField,
    fb: Vec<PrimeIdeal>,
    bound: u64,
    group: FgAbGroup,
}

fn class_cache() -> &'static Mutex<HashMap<FieldKind, Arc<ClassGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<FieldKind, Arc<ClassGroup>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The class group of `field` (cached).
pub fn class_group(field: &NumberField) -> Result<Arc<ClassGroup>> {
    if let Some(c) = class_cache()
        .lock()
        .expect("class cache")
        .get(&field.kind())
    {
        return Ok(c.clone());
    }
    let c = Arc::new(ClassGroup::compute(field)?);
    Ok(class_cache()
        .lock()
        .expect("class cache")
        .entry(field.kind())
        .or_insert(c)
        .clone())
}

const MAX_ATTEMPTS: usize = 50_000;

impl ClassGroup {
    fn compute(field: &NumberField) -> Result<ClassGroup> {
        let bound = minkowski_bound(field);
        let mut fb = Vec::new();
        for p in primes_up_to(bound) {
            for q in primes_above(field, p) {
                if q.norm() <= &BigInt::from(bound) {
                    fb.push(q);
                }
            }
        }
        let h = class_number_oracle(field)?;
        let k = fb.len();
        if h.is_one() {
            let group = FgAbGroup::from_presentation(k, &IntMatrix::identity(k));
            return Ok(ClassGroup {
                field: field.clone(),
                fb,
                bound,
                group,
            });
        }
        let mut this = ClassGroup {
            field: field.clone(),
            fb,
            bound,
            group: FgAbGroup::trivial(),
        };
        let mut lattice = IntMatrix::zeros(0, k);
        // (p) splits over the factor base whenever every prime above p is in it
        for p in primes_up_to(bound) {
            if let Some(v) = this.smooth_vector(&Ideal::from_int(field, &BigInt::from(p))) {
                lattice = lattice.vstack(&IntMatrix::from_rows(vec![v], k));
            }
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(0x5eed ^ field.discriminant().to_u64().unwrap_or(1));
        let mut det = BigInt::zero();
        // a wider box in degree 2, where reduced bases can be far from the
        // short relations
        let box_radius = if field.degree() == 2 { 3 } else { 1 };
        for attempt in 0..MAX_ATTEMPTS {
            if lattice.rows() >= k {
                let hb = hnf_basis(&lattice);
                lattice = hb;
                if lattice.rows() == k {
                    det = (0..k).fold(BigInt::one(), |acc, i| acc * &lattice[(i, i)]);
                    if det == h {
                        break;
                    }
                    if det < h {
                        return Err(Error::OracleMismatch {
                            field: field.to_string(),
                            found: det.to_string(),
                            oracle: h.to_string(),
                        });
                    }
                }
            }
            let mut e = vec![BigInt::zero(); k];
            let terms = 1 + attempt % 3;
            for _ in 0..terms {
                let j = rng.gen_range(0..k);
                e[j] += BigInt::from(rng.gen_range(1..=4));
            }
            let ideal = this.fb_product(&e);
            for alpha in ideal.short_elements(box_radius).into_iter().take(16) {
                let principal = Ideal::principal(&alpha)?;
                let Some(cof) = principal
                    .mul(&ideal.conjugate_product())
                    .div_int(ideal.norm())
                else {
                    continue;
                };
                if let Some(v) = this.smooth_vector(&cof) {
                    let rel: Vec<BigInt> = e.iter().zip(&v).map(|(a, b)| a + b).collect();
                    lattice = lattice.vstack(&IntMatrix::from_rows(vec![rel], k));
                }
            }
        }
        if det != h {
            return Err(Error::OracleMismatch {
                field: field.to_string(),
                found: det.to_string(),
                oracle: h.to_string(),
            });
        }
        this.group = FgAbGroup::from_presentation(k, &lattice);
        Ok(this)
    }

    /// `∏ fb_j^{e_j}` for nonnegative exponents.
    fn fb_product(&self, e: &[BigInt]) -> Ideal {
        self.fb
            .iter()
            .zip(e)
            .fold(Ideal::unit(&self.field), |acc, (p, x)| {
                let k = x.to_u32().expect("small nonnegative exponent");
                if k == 0 {
                    acc
                } else {
                    acc.mul(&p.ideal().pow(k))
                }
            })
    }

    /// Exponent vector over the factor base, if `a` factors over it.
    fn smooth_vector(&self, a: &Ideal) -> Option<Vec<BigInt>> {
        let mut rest = a.norm().clone();
        for p in primes_up_to(self.bound) {
            let pb = BigInt::from(p);
            while rest.is_multiple_of(&pb) {
                rest /= &pb;
            }
        }
        if !rest.is_one() {
            return None;
        }
        let mut covered = BigInt::one();
        let v: Vec<BigInt> = self
            .fb
            .iter()
            .map(|p| {
                let e = valuation(a, p);
                covered *= num_traits::pow(p.norm().clone(), e as usize);
                BigInt::from(e)
            })
            .collect();
        (covered == *a.norm()).then_some(v)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// Canonical class group.
    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn order(&self) -> BigInt {
        self.group.order().expect("class groups are finite")
    }

    pub fn factor_base(&self) -> &[PrimeIdeal] {
        &self.fb
    }

    /// Canonical coordinates of the class of an integral ideal.
    pub fn class_of(&self, a: &Ideal) -> Result<Vec<BigInt>> {
        if a.field() != &self.field {
            return Err(Error::FieldMismatch(format!(
                "ideal of {} given for {}",
                a.field(),
                self.field
            )));
        }
        if self.group.is_trivial() {
            return Ok(vec![]);
        }
        if let Some(v) = self.smooth_vector(a) {
            return Ok(self.group.canon_of(&v));
        }
        let k = self.fb.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0xc1a55);
        for attempt in 0..MAX_ATTEMPTS {
            // class(a) = class(a·J) - class(J)
            let mut e = vec![BigInt::zero(); k];
            if attempt > 0 {
                let j = rng.gen_range(0..k);
                e[j] = BigInt::from(rng.gen_range(1..=3));
            }
            let shifted = a.mul(&self.fb_product(&e));
            for alpha in shifted.short_elements(1).into_iter().take(12) {
                let principal = Ideal::principal(&alpha)?;
                let Some(cof) = principal
                    .mul(&shifted.conjugate_product())
                    .div_int(shifted.norm())
                else {
                    continue;
                };
                if let Some(v) = self.smooth_vector(&cof) {
                    let total: Vec<BigInt> = v.iter().zip(&e).map(|(b, j)| -b - j).collect();
                    return Ok(self.group.canon_of(&total));
                }
            }
        }
        Err(Error::ReductionStalled(format!("{} in {}", a, self.field)))
    }

    pub fn is_principal_ideal(&self, a: &Ideal) -> Result<bool> {
        Ok(self.group.is_zero_element(&self.class_of(a)?))
    }

    /// An integral ideal in the class with the given canonical coordinates.
    pub fn representative(&self, canon: &[BigInt]) -> Ideal {
        let h = self.order();
        let e: Vec<BigInt> = self
            .group
            .presentation_of(canon)
            .iter()
            .map(|x| x.mod_floor(&h))
            .collect();
        self.fb_product(&e)
    }

    /// Action of an automorphism on canonical coordinates.
    pub fn galois_matrix(&self, sigma: &Automorphism) -> IntMatrix {
        let k = self.fb.len();
        let mut perm = IntMatrix::zeros(k, k);
        for (i, p) in self.fb.iter().enumerate() {
            let img = p.apply(sigma);
            let j = self
                .fb
                .iter()
                .position(|q| *q == img)
                .expect("factor base is Galois stable");
            perm[(i, j)] = BigInt::one();
        }
        let m = self
            .group
            .from_canon()
            .mul(&perm)
            .mul(self.group.to_canon());
        let rows: Vec<Vec<BigInt>> = (0..m.rows()).map(|i| self.group.reduce(m.row(i))).collect();
        IntMatrix::from_rows(rows, self.group.rank())
    }

    /// Subgroup generated by the classes of the given primes.
    pub fn span_of_primes(&self, primes: &[PrimeIdeal]) -> Result<Subgroup> {
        let rows = primes
            .iter()
            .map(|p| self.class_of(p.ideal()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.group.span(&rows))
    }
}

/// `Cl(K)_S = Cl(K) / ⟨classes of the primes of K in S⟩`.
#[derive(Clone, Debug)]
pub struct SClassGroup {
    parent: Arc<ClassGroup>,
    s: SSet,
    quotient: Quotient,
}

/// The `S`-class group of `field`, with `s` given on `field` or a subfield.
pub fn s_class_group(field: &NumberField, s: &SSet) -> Result<SClassGroup> {
    let parent = class_group(field)?;
    let s = s.lift(field)?;
    let quotient = parent.group().quotient(&parent.span_of_primes(s.primes())?);
    Ok(SClassGroup {
        parent,
        s,
        quotient,
    })
}

impl SClassGroup {
    pub fn parent(&self) -> &ClassGroup {
        &self.parent
    }

    pub fn s(&self) -> &SSet {
        &self.s
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.quotient.group
    }

    /// `Cl(K) → Cl(K)_S`.
    pub fn projection(&self) -> &GroupHom {
        &self.quotient.projection
    }

    pub fn class_of(&self, a: &Ideal) -> Result<Vec<BigInt>> {
        Ok(self.quotient.projection.apply(&self.parent.class_of(a)?))
    }

    /// A class of `Cl(K)` mapping to the given canonical generator.
    pub fn lift_generator(&self, i: usize) -> Vec<BigInt> {
        self.quotient.lift_generator(i)
    }

    pub fn galois_matrix(&self, sigma: &Automorphism) -> IntMatrix {
        let m = self.parent.galois_matrix(sigma);
        let g = self.group();
        let rows: Vec<Vec<BigInt>> = (0..g.rank())
            .map(|i| {
                self.quotient.projection.apply(
                    &self
                        .parent
                        .group()
                        .reduce(&m.apply(&self.lift_generator(i))),
                )
            })
            .collect();
        IntMatrix::from_rows(rows, g.rank())
    }
}

/// The capitulation map `Cl(sub)_S → Cl(field)_S` induced by extending
/// ideals; `s` is given on `sub`.
pub fn capitulation(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<GroupHom> {
    if s.field() != sub {
        return Err(Error::FieldMismatch(format!(
            "S of {} given for {}",
            s.field(),
            sub
        )));
    }
    field.relative_degree(sub)?;
    let small = s_class_group(sub, s)?;
    let large = s_class_group(field, s)?;
    let mut rows = Vec::new();
    for i in 0..small.group().rank() {
        let rep = small.parent().representative(&small.lift_generator(i));
        rows.push(large.class_of(&extend_ideal(sub, field, &rep)?)?);
    }
    GroupHom::new(
        small.group().clone(),
        large.group().clone(),
        IntMatrix::from_rows(rows, large.group().rank()),
    )
}

/// Classes of `Cl(field)_S` fixed by `Gal(field/sub)`.
pub fn ambiguous_classes(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<Subgroup> {
    let cl = s_class_group(field, s)?;
    let mats: Vec<IntMatrix> = field
        .galois_group_over(sub)?
        .iter()
        .map(|g| cl.galois_matrix(g))
        .collect();
    cl.group().fixed_points(&mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::bigs;

    fn q(d: i64) -> NumberField {
        NumberField::quadratic(d).unwrap()
    }

    #[test]
    fn quadratic_class_groups() {
        assert_eq!(
            class_group(&q(-5)).unwrap().group().invariants(),
            &bigs(&[2])
        );
        assert!(class_group(&q(-1)).unwrap().group().is_trivial());
        assert_eq!(
            class_group(&q(-23)).unwrap().group().invariants(),
            &bigs(&[3])
        );
        assert_eq!(
            class_group(&q(-21)).unwrap().group().invariants(),
            &bigs(&[2, 2])
        );
        assert_eq!(
            class_group(&q(10)).unwrap().group().invariants(),
            &bigs(&[2])
        );
        assert_eq!(
            class_group(&q(229)).unwrap().group().invariants(),
            &bigs(&[3])
        );
    }

    #[test]
    fn biquadratic_class_numbers() {
        let k = NumberField::biquadratic(-1, 5).unwrap();
        assert_eq!(class_number_oracle(&k).unwrap(), BigInt::one());
        let k = NumberField::biquadratic(-1, 2).unwrap();
        assert_eq!(class_number_oracle(&k).unwrap(), BigInt::one());
        let k = NumberField::biquadratic(2, 3).unwrap();
        assert_eq!(class_number_oracle(&k).unwrap(), BigInt::one());
        assert_eq!(subfield_unit_index(&k).unwrap(), BigInt::from(4));
    }

    #[test]
    fn class_of_matches_principality() {
        let k = q(-5);
        let cl = class_group(&k).unwrap();
        let p2 = primes_above(&k, 2)[0].ideal().clone();
        assert!(!cl.is_principal_ideal(&p2).unwrap());
        let p3 = primes_above(&k, 3)[0].ideal().clone();
        let big = primes_above(&k, 29)[0].ideal().clone();
        for a in [
            p2.clone(),
            p3.clone(),
            big.clone(),
            p2.mul(&p3),
            p3.mul(&big),
        ] {
            let principal = crate::ideal::is_principal(&a).unwrap().is_some();
            assert_eq!(cl.is_principal_ideal(&a).unwrap(), principal, "{}", a);
        }
    }

    #[test]
    fn s_class_groups() {
        let k = q(-5);
        assert!(s_class_group(&k, &SSet::above_rational(&k, &[2]))
            .unwrap()
            .group()
            .is_trivial());
        let s11 = s_class_group(&k, &SSet::above_rational(&k, &[11])).unwrap();
        assert_eq!(s11.group().invariants(), &bigs(&[2]));
        let inf = s_class_group(&k, &SSet::archimedean(&k)).unwrap();
        assert_eq!(
            inf.group().invariants(),
            class_group(&k).unwrap().group().invariants()
        );
    }

    #[test]
    fn capitulation_examples() {
        let f = q(-5);
        let k = NumberField::biquadratic(-1, 5).unwrap();
        let eps = capitulation(&k, &f, &SSet::archimedean(&f)).unwrap();
        assert_eq!(eps.kernel().group().invariants(), &bigs(&[2]));
        let qq = NumberField::rational();
        let eps = capitulation(&f, &qq, &SSet::archimedean(&qq)).unwrap();
        assert!(eps.source().is_trivial());
        let eps = capitulation(&f, &f, &SSet::archimedean(&f)).unwrap();
        assert!(eps.is_injective() && eps.is_surjective());
    }

    #[test]
    fn ambiguous_examples() {
        let f = q(-5);
        let qq = NumberField::rational();
        let amb = ambiguous_classes(&f, &qq, &SSet::archimedean(&qq)).unwrap();
        assert_eq!(amb.order(), Some(BigInt::from(2)));
        let amb = ambiguous_classes(&f, &f, &SSet::archimedean(&f)).unwrap();
        assert_eq!(amb.order(), Some(BigInt::from(2)));
    }

    #[test]
    fn class_map_laws() {
        for k in [
            q(-5),
            q(-21),
            q(-23),
            q(10),
            NumberField::biquadratic(2, -5).unwrap(),
        ] {
            let cl = class_group(&k).unwrap();
            let g = cl.group();
            let ps: Vec<PrimeIdeal> = [2u64, 3, 5, 7, 11, 13]
                .iter()
                .flat_map(|&p| primes_above(&k, p))
                .collect();
            for a in ps.iter().take(6) {
                for b in ps.iter().skip(2).take(4) {
                    let ab = cl.class_of(&a.ideal().mul(b.ideal())).unwrap();
                    let sum = g.add(
                        &cl.class_of(a.ideal()).unwrap(),
                        &cl.class_of(b.ideal()).unwrap(),
                    );
                    assert_eq!(ab, sum);
                }
                for s in k.automorphisms() {
                    let lhs = cl.class_of(&a.ideal().apply(s)).unwrap();
                    let rhs =
                        g.reduce(&cl.galois_matrix(s).apply(&cl.class_of(a.ideal()).unwrap()));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn capitulation_commutes_with_class_map() {
        let k = NumberField::biquadratic(2, -5).unwrap();
        for f in k.quadratic_subfields() {
            let s = SSet::archimedean(&f);
            let eps = capitulation(&k, &f, &s).unwrap();
            let clf = s_class_group(&f, &s).unwrap();
            let clk = s_class_group(&k, &s).unwrap();
            for p in [2u64, 3, 7, 11] {
                for q in primes_above(&f, p) {
                    let lhs = clk
                        .class_of(&extend_ideal(&f, &k, q.ideal()).unwrap())
                        .unwrap();
                    let rhs = eps.apply(&clf.class_of(q.ideal()).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
            let ker = eps.kernel().order().unwrap();
            let im = eps.image().order().unwrap();
            assert_eq!(ker * im, clf.group().order().unwrap());
            let amb = ambiguous_classes(&k, &f, &s).unwrap();
            assert!(eps.image().generators().iter().all(|g| amb.contains(g)));
        }
    }
}
