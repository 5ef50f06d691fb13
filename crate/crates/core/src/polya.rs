//! Ostrowski ideals, relative Pólya groups with support outside `S`,
//! Ostrowski quotients, unit cohomology, and the identity checks relating
//! them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{lattice_kernel, unit_vector, FgAbGroup, GroupHom, IntMatrix, Subgroup};
use crate::classgroup::{ambiguous_classes, capitulation, class_group, s_class_group, SClassGroup};
use crate::error::{Error, Result};
use crate::ideal::{extend_ideal, factor, primes_above, split_prime, Ideal, PrimeIdeal, SSet};
use crate::numfield::{prime_factors, primes_up_to, NumberField};
use crate::units::{s_unit_group, unit_norm_quotient};

/// Default bound on the rational primes scanned by the definition-based
/// Pólya group.
pub const DEFINITION_SCAN_BOUND: u64 = 100;

/// Product of the primes of `field` above `base` with relative residue
/// degree `f`, or the unit ideal when there are none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OstrowskiIdeal {
    ideal: Ideal,
    base: PrimeIdeal,
    f: u32,
}

impl OstrowskiIdeal {
    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn base(&self) -> &PrimeIdeal {
        &self.base
    }

    pub fn f(&self) -> u32 {
        self.f
    }
}

pub fn ostrowski_ideal(
    field: &NumberField,
    sub: &NumberField,
    base: &PrimeIdeal,
    f: u32,
) -> Result<OstrowskiIdeal> {
    let ideal = split_prime(field, sub, base)?
        .iter()
        .filter(|r| r.f == f)
        .fold(Ideal::unit(field), |acc, r| acc.mul(r.prime.ideal()));
    Ok(OstrowskiIdeal {
        ideal,
        base: base.clone(),
        f,
    })
}

/// Label for a prime: `p` when it is the only prime above `p`, else
/// `(p,i)` with a 1-based index in the fixed order.
pub fn prime_label(p: &PrimeIdeal) -> String {
    let above = primes_above(p.field(), p.p());
    if above.len() == 1 {
        p.p().to_string()
    } else {
        let i = above.iter().position(|q| q == p).expect("prime above p") + 1;
        format!("({},{})", p.p(), i)
    }
}

/// Primes of `sub` ramified in `field`, with their relative ramification
/// index.
pub fn ramified_primes(field: &NumberField, sub: &NumberField) -> Result<Vec<(PrimeIdeal, u32)>> {
    let mut out = Vec::new();
    if field == sub {
        field.relative_degree(sub)?;
        return Ok(out);
    }
    for p in prime_factors(field.discriminant()) {
        let p = p.to_u64().expect("small prime");
        for q in primes_above(sub, p) {
            let split = split_prime(field, sub, &q)?;
            let e = split[0].e;
            if e > 1 {
                out.push((q, e));
            }
        }
    }
    Ok(out)
}

/// Exponents `n_𝔭` with `a = ∏ Π_𝔭^{n_𝔭}` for a Galois-invariant ideal
/// prime to `S`, in increasing order of the base prime.
pub fn invariant_factorization(
    field: &NumberField,
    sub: &NumberField,
    s: &SSet,
    a: &Ideal,
) -> Result<Vec<(OstrowskiIdeal, u32)>> {
    let gal = field.galois_group_over(sub)?;
    if !a.is_invariant_under(&gal) {
        return Err(Error::NotInvariant);
    }
    let s_k = s.lift(field)?;
    let mut by_base: Vec<(PrimeIdeal, u32, u32)> = Vec::new();
    for (pr, v) in factor(a) {
        if s_k.contains(&pr) {
            return Err(Error::MeetsS(prime_label(&pr)));
        }
        let base = primes_above(sub, pr.p())
            .into_iter()
            .find(|q| {
                extend_ideal(sub, field, q.ideal())
                    .map(|e| pr.ideal().contains(&e))
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::Internal("prime has no base prime".into()))?;
        let f = pr.f() / base.f();
        match by_base.iter().find(|(b, _, _)| *b == base) {
            Some((_, _, n)) if *n != v => return Err(Error::NotInvariant),
            Some(_) => {}
            None => by_base.push((base, f, v)),
        }
    }
    let mut out = Vec::new();
    for (base, f, n) in by_base {
        out.push((ostrowski_ideal(field, sub, &base, f)?, n));
    }
    out.sort_by(|x, y| {
        x.0.base
            .p()
            .cmp(&y.0.base.p())
            .then_with(|| prime_label(&x.0.base).cmp(&prime_label(&y.0.base)))
    });
    let rebuilt = out
        .iter()
        .fold(Ideal::unit(field), |acc, (o, n)| acc.mul(&o.ideal.pow(*n)));
    if rebuilt != *a {
        return Err(Error::Internal(
            "invariant factorization does not reconstruct".into(),
        ));
    }
    Ok(out)
}

/// `Po(K/F)_S` inside `Cl(K)_S`, with the `Cl(K)`-valued companion.
#[derive(Clone, Debug)]
pub struct PolyaGroupS {
    ambient: SClassGroup,
    subgroup: Subgroup,
    generators: Vec<(String, Vec<BigInt>)>,
    ambient_lift: Subgroup,
}

impl PolyaGroupS {
    pub fn ambient(&self) -> &SClassGroup {
        &self.ambient
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn generators(&self) -> &[(String, Vec<BigInt>)] {
        &self.generators
    }

    /// Span in `Cl(K)` of the capitulated classes of `Cl(F)` and the
    /// ramified Ostrowski classes outside `S`.
    pub fn ambient_lift(&self) -> &Subgroup {
        &self.ambient_lift
    }

    pub fn order(&self) -> BigInt {
        self.subgroup.order().expect("finite")
    }
}

/// The image of `Cl(sub)` in `Cl(field)` under extension of ideals.
fn full_capitulation_image(field: &NumberField, sub: &NumberField) -> Result<Vec<Vec<BigInt>>> {
    let small = class_group(sub)?;
    let large = class_group(field)?;
    (0..small.group().rank())
        .map(|i| {
            let rep = small.representative(&unit_vector(small.group().rank(), i));
            large.class_of(&extend_ideal(sub, field, &rep)?)
        })
        .collect()
}

/// `Po(K/F)_S`, generated by the capitulated classes of `Cl(F)_S` and the
/// classes of `Π_𝔭` for ramified `𝔭 ∉ S`. `s` lives on `sub` or below.
pub fn relative_polya_group_s(
    field: &NumberField,
    sub: &NumberField,
    s: &SSet,
) -> Result<PolyaGroupS> {
    let s_f = s.lift(sub)?;
    let ambient = s_class_group(field, &s_f)?;
    let cl = class_group(field)?;
    let mut generators = Vec::new();
    let mut lift_rows = Vec::new();
    if field == sub {
        for i in 0..ambient.group().rank() {
            generators.push((
                format!("cl{}", i + 1),
                unit_vector(ambient.group().rank(), i),
            ));
        }
        for i in 0..cl.group().rank() {
            lift_rows.push(unit_vector(cl.group().rank(), i));
        }
    } else {
        let eps = capitulation(field, sub, &s_f)?;
        for i in 0..eps.source().rank() {
            generators.push((format!("eps{}", i + 1), eps.matrix().row_vec(i)));
        }
        lift_rows.extend(full_capitulation_image(field, sub)?);
        for (q, _) in ramified_primes(field, sub)? {
            if s_f.contains(&q) {
                continue;
            }
            let f = split_prime(field, sub, &q)?[0].f;
            let pi = ostrowski_ideal(field, sub, &q, f)?;
            let c = cl.class_of(pi.ideal())?;
            generators.push((
                format!("Pi{}", prime_label(&q)),
                ambient.projection().apply(&c),
            ));
            lift_rows.push(c);
        }
    }
    let rows: Vec<Vec<BigInt>> = generators.iter().map(|g| g.1.clone()).collect();
    let subgroup = ambient.group().span(&rows);
    let ambient_lift = cl.group().span(&lift_rows);
    Ok(PolyaGroupS {
        ambient,
        subgroup,
        generators,
        ambient_lift,
    })
}

/// `Po(K/F)_S` straight from its definition: classes of every Ostrowski
/// ideal over primes `𝔭 ∉ S` below `bound`, plus every ramified `𝔭 ∉ S`.
pub fn polya_group_by_definition(
    field: &NumberField,
    sub: &NumberField,
    s: &SSet,
    bound: u64,
) -> Result<Subgroup> {
    let s_f = s.lift(sub)?;
    let ambient = s_class_group(field, &s_f)?;
    let mut ps = primes_up_to(bound);
    for p in prime_factors(field.discriminant()) {
        let p = p.to_u64().expect("small prime");
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    let mut rows = Vec::new();
    for p in ps {
        for q in primes_above(sub, p) {
            if s_f.contains(&q) {
                continue;
            }
            let mut fs: Vec<u32> = split_prime(field, sub, &q)?.iter().map(|r| r.f).collect();
            fs.dedup();
            for f in fs {
                rows.push(ambient.class_of(ostrowski_ideal(field, sub, &q, f)?.ideal())?);
            }
        }
    }
    Ok(ambient.group().span(&rows))
}

/// `Ost(K/F)_S = Po(K/F)_S / ε_S(Cl(F)_S)`.
pub fn ostrowski_quotient_s(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<FgAbGroup> {
    let s_f = s.lift(sub)?;
    let po = relative_polya_group_s(field, sub, &s_f)?;
    let eps = capitulation(field, sub, &s_f)?;
    Ok(po.subgroup.corestrict(&eps)?.cokernel().group)
}

/// `H¹` of a cyclic group of order `n` acting through `action`:
/// `ker N / im(σ - 1)`.
pub fn h1_cyclic(module: &FgAbGroup, action: &IntMatrix, n: usize) -> Result<FgAbGroup> {
    let k = module.rank();
    let id = IntMatrix::identity(k);
    let mut norm = IntMatrix::zeros(k, k);
    let mut power = id.clone();
    for _ in 0..n {
        norm = norm.add(&power);
        power = power.mul(action);
    }
    let ker = GroupHom::new(module.clone(), module.clone(), norm)?.kernel();
    let im = GroupHom::new(module.clone(), module.clone(), action.sub(&id))?.image();
    ker.quotient_by(&im)
}

/// `H¹` of an elementary abelian 2-group generated by commuting
/// involutions, as crossed homomorphisms modulo principal ones.
pub fn h1_involutions(module: &FgAbGroup, actions: &[IntMatrix]) -> Result<FgAbGroup> {
    let k = module.rank();
    let t = actions.len();
    let id = IntMatrix::identity(k);
    let inv = module.invariants().to_vec();
    // cocycles are t-tuples; the presentation of M^t
    let pres_inv: Vec<BigInt> = (0..t).flat_map(|_| inv.iter().cloned()).collect();
    let big = FgAbGroup::from_presentation(t * k, &IntMatrix::diagonal(&pres_inv));
    // conditions: (1 + g_i) x_i = 0 and (g_i - 1) x_j = (g_j - 1) x_i
    let pairs: Vec<(usize, usize)> = (0..t)
        .flat_map(|i| (i + 1..t).map(move |j| (i, j)))
        .collect();
    let ncond = t + pairs.len();
    let mut phi = IntMatrix::zeros(t * k, ncond * k);
    let mut put = |row_block: usize, col_block: usize, m: &IntMatrix, sign: i64| {
        for r in 0..k {
            for c in 0..k {
                phi[(row_block * k + r, col_block * k + c)] += &m[(r, c)] * BigInt::from(sign);
            }
        }
    };
    for (i, a) in actions.iter().enumerate() {
        put(i, i, &id.add(a), 1);
    }
    for (n, &(i, j)) in pairs.iter().enumerate() {
        put(j, t + n, &actions[i].sub(&id), 1);
        put(i, t + n, &actions[j].sub(&id), -1);
    }
    let mods: Vec<BigInt> = (0..ncond).flat_map(|_| inv.iter().cloned()).collect();
    let kern = lattice_kernel(&phi, &mods);
    let cocycles: Vec<Vec<BigInt>> = kern.to_rows().iter().map(|v| big.canon_of(v)).collect();
    let z1 = big.span(&cocycles);
    let coboundaries: Vec<Vec<BigInt>> = (0..k)
        .map(|m| {
            let e = unit_vector(k, m);
            let v: Vec<BigInt> = actions.iter().flat_map(|a| a.sub(&id).apply(&e)).collect();
            big.canon_of(&v)
        })
        .collect();
    z1.quotient_by(&big.span(&coboundaries))
}

/// `H¹(Gal(K/F), U_{K,S})`.
pub fn h1_units(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<FgAbGroup> {
    let s_f = s.lift(sub)?;
    let gal = field.galois_group_over(sub)?;
    if gal.len() == 1 {
        return Ok(FgAbGroup::trivial());
    }
    let su = s_unit_group(field, &s_f)?;
    let module = su.group().clone();
    if gal.len() == 2 {
        return h1_cyclic(&module, &su.galois_matrix(&gal[1])?, 2);
    }
    // Klein four: two generating involutions
    let acts = [su.galois_matrix(&gal[1])?, su.galois_matrix(&gal[2])?];
    h1_involutions(&module, &acts)
}

/// Whether `Gal(field/sub)` is cyclic.
pub fn is_cyclic(field: &NumberField, sub: &NumberField) -> Result<bool> {
    Ok(field.relative_degree(sub)? <= 2)
}

/// `∏_{v ∈ S} |G_w|` over the places of `sub` in `S` (archimedean places
/// included).
pub fn decomposition_product(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<BigInt> {
    let s_f = s.lift(sub)?;
    field.relative_degree(sub)?;
    let arch = if sub.is_totally_real() && !field.is_totally_real() {
        2u32
    } else {
        1
    };
    let mut out = BigInt::from(arch).pow(sub.infinite_places().len() as u32);
    for q in s_f.primes() {
        let r = &split_prime(field, sub, q)?[0];
        out *= BigInt::from(r.e * r.f);
    }
    Ok(out)
}

/// `Ĥ⁰ = U_{F,S} / N U_{K,S}`.
pub fn tate_h0_units(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<FgAbGroup> {
    unit_norm_quotient(field, sub, &s.lift(sub)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

/// A named comparison of two computed quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Value,
    pub rhs: Value,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn compare(name: &str, lhs: &BigInt, rhs: &BigInt) -> Check {
        let verdict = if lhs == rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Check {
            name: name.into(),
            lhs: big_json(lhs),
            rhs: big_json(rhs),
            verdict,
            detail: None,
        }
    }

    pub fn undecided(name: &str, err: &Error) -> Check {
        Check {
            name: name.into(),
            lhs: Value::Null,
            rhs: Value::Null,
            verdict: Verdict::Undecided,
            detail: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn big_json(v: &BigInt) -> Value {
    match v.to_u64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn order(g: &FgAbGroup) -> BigInt {
    g.order().expect("finite group")
}

fn sub_order(g: &Subgroup) -> BigInt {
    g.order().expect("finite group")
}

fn require_unramified_outside(field: &NumberField, sub: &NumberField, s_f: &SSet) -> Result<()> {
    for (q, _) in ramified_primes(field, sub)? {
        if !s_f.contains(&q) {
            return Err(Error::Precondition(format!(
                "{} ramifies outside S",
                prime_label(&q)
            )));
        }
    }
    Ok(())
}

/// `|Ĥ⁰|·[K:F] = |H¹|·∏_{v∈S}|G_w|` for cyclic `K/F`.
pub fn herbrand_check(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<Check> {
    if !is_cyclic(field, sub)? {
        return Err(Error::Precondition(format!(
            "{} over {} is not cyclic",
            field, sub
        )));
    }
    let deg = BigInt::from(field.relative_degree(sub)?);
    let h0 = order(&tate_h0_units(field, sub, s)?);
    let h1 = order(&h1_units(field, sub, s)?);
    let dec = decomposition_product(field, sub, s)?;
    Ok(Check::compare("herbrand", &(h0 * deg), &(h1 * dec)))
}

/// `(∏_{v∈S}|G_w|)·|Ker ε_S| = (U_{F,S} : N U_{K,S})·[K:F]` for cyclic
/// `K/F` unramified outside `S`.
pub fn hilbert94_check(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<Check> {
    let s_f = s.lift(sub)?;
    if !is_cyclic(field, sub)? {
        return Err(Error::Precondition(format!(
            "{} over {} is not cyclic",
            field, sub
        )));
    }
    require_unramified_outside(field, sub, &s_f)?;
    let deg = BigInt::from(field.relative_degree(sub)?);
    let ker = sub_order(&capitulation(field, sub, &s_f)?.kernel());
    let dec = decomposition_product(field, sub, &s_f)?;
    let index = order(&tate_h0_units(field, sub, &s_f)?);
    Ok(Check::compare("hilbert94", &(dec * ker), &(index * deg)))
}

/// For `K/F` unramified outside `S`: `Ker ε_S ≅ H¹(G, U_{K,S})` and
/// `Ost(K/F)_S = 0`. The two sides are the invariant factors of the
/// kernel and of `H¹ ⊕ Ost`.
pub fn ikp_check(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<Check> {
    let s_f = s.lift(sub)?;
    require_unramified_outside(field, sub, &s_f)?;
    let ker = capitulation(field, sub, &s_f)?.kernel().group().clone();
    let h1 = h1_units(field, sub, &s_f)?;
    let ost = ostrowski_quotient_s(field, sub, &s_f)?;
    let rhs = FgAbGroup::direct_sum(&[&h1, &ost]);
    let lhs_v = invariants_json(&ker);
    let rhs_v = invariants_json(&rhs);
    let verdict = if ker.invariants() == h1.invariants() && ost.is_trivial() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Check {
        name: "ikp".into(),
        lhs: lhs_v,
        rhs: rhs_v,
        verdict,
        detail: None,
    })
}

fn invariants_json(g: &FgAbGroup) -> Value {
    Value::Array(g.invariants().iter().map(big_json).collect())
}

/// The filtration `Po(K/Q)_S ⊆ Po(K/M)_S ⊆ Cl(K)_S` for a quadratic
/// subfield `M` of a biquadratic `K`, and the monotonicity of the
/// `Cl(K)`-valued lifts when `S` shrinks to the archimedean places.
pub fn filtration_check(field: &NumberField, mid: &NumberField, s: &SSet) -> Result<Check> {
    let q = NumberField::rational();
    if s.field() != &q {
        return Err(Error::Precondition("S must be given over Q".into()));
    }
    if !field.quadratic_subfields().contains(mid) {
        return Err(Error::NotSubfield(format!("{} in {}", mid, field)));
    }
    let bottom = relative_polya_group_s(field, &q, s)?;
    let middle = relative_polya_group_s(field, mid, s)?;
    let contained = bottom.subgroup.is_subgroup_of(&middle.subgroup);
    let inf = SSet::archimedean(&q);
    let mut monotone = true;
    for sub in [&q, mid] {
        let small_s = relative_polya_group_s(field, sub, &inf)?;
        let large_s = relative_polya_group_s(field, sub, s)?;
        monotone &= large_s.ambient_lift.is_subgroup_of(&small_s.ambient_lift);
    }
    let verdict = if contained && monotone {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let detail = (!contained || !monotone)
        .then(|| format!("containment {}, monotone {}", contained, monotone));
    Ok(Check {
        name: format!("filtration[{}]", mid),
        lhs: big_json(&bottom.order()),
        rhs: big_json(&middle.order()),
        verdict,
        detail,
    })
}

/// Order and invariant factors of a finite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupSummary {
    pub order: u64,
    pub invariant_factors: Vec<u64>,
}

impl GroupSummary {
    pub fn of(g: &FgAbGroup) -> GroupSummary {
        GroupSummary {
            order: order(g).to_u64().expect("small group"),
            invariant_factors: g
                .invariants()
                .iter()
                .map(|d| d.to_u64().expect("small factor"))
                .collect(),
        }
    }
}

/// Everything computed for one `(K, F, S)`.
#[derive(Clone, Debug, Serialize)]
pub struct BrzReport {
    pub field: String,
    pub base: String,
    #[serde(rename = "S")]
    pub s: String,
    pub groups: BTreeMap<String, GroupSummary>,
    pub checks: Vec<Check>,
}

impl BrzReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn group(&self, name: &str) -> Option<&GroupSummary> {
        self.groups.get(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn brz_groups(
    field: &NumberField,
    sub: &NumberField,
    s_f: &SSet,
) -> Result<(BTreeMap<String, FgAbGroup>, Vec<Check>)> {
    let mut g = BTreeMap::new();
    let mut checks = Vec::new();
    let clk = s_class_group(field, s_f)?;
    let clf = s_class_group(sub, s_f)?;
    g.insert("cl_K".to_string(), clk.parent().group().clone());
    g.insert("cl_F".to_string(), clf.parent().group().clone());
    g.insert("cl_K_S".to_string(), clk.group().clone());
    g.insert("cl_F_S".to_string(), clf.group().clone());
    let eps = capitulation(field, sub, s_f)?;
    let ker = eps.kernel().group().clone();
    let amb = ambiguous_classes(field, sub, s_f)?;
    let image = eps.image();
    let coker = amb.quotient_by(&image)?;
    let po = relative_polya_group_s(field, sub, s_f)?;
    let ost = po.subgroup.corestrict(&eps)?.cokernel().group;
    let h1 = h1_units(field, sub, s_f)?;
    let ram: Vec<BigInt> = ramified_primes(field, sub)?
        .iter()
        .filter(|(q, _)| !s_f.contains(q))
        .map(|(_, e)| BigInt::from(*e))
        .collect();
    let ram_group = FgAbGroup::from_cyclic_orders(&ram);
    let e_prod: BigInt = ram.iter().product();

    // (a) exactness of the S-BRZ sequence, on orders
    checks.push(Check::compare(
        "brz_exact",
        &(order(&ker) * &e_prod),
        &(order(&h1) * order(&ost)),
    ));
    // (b) the cokernel sequence
    checks.push(Check::compare(
        "cokernel",
        &(order(&coker) * po.order()),
        &(order(&ost) * sub_order(&amb)),
    ));
    // (c) cyclic and unramified outside S
    if is_cyclic(field, sub)? && require_unramified_outside(field, sub, s_f).is_ok() && field != sub
    {
        let h0 = tate_h0_units(field, sub, s_f)?;
        checks.push(Check::compare("kisilevsky", &order(&h0), &order(&coker)));
        g.insert("h0".to_string(), h0);
    }
    if is_cyclic(field, sub)? && field != sub {
        checks.push(herbrand_check(field, sub, s_f)?);
    }
    // (d) generator reduction against the definition
    let by_def = polya_group_by_definition(field, sub, s_f, DEFINITION_SCAN_BOUND)?;
    let agree = by_def.same_as(&po.subgroup);
    checks.push(Check {
        name: "po_oracle".into(),
        lhs: big_json(&po.order()),
        rhs: big_json(&sub_order(&by_def)),
        verdict: if agree { Verdict::Pass } else { Verdict::Fail },
        detail: None,
    });

    g.insert("ker_eps".to_string(), ker);
    g.insert("coker_eps".to_string(), coker);
    g.insert("amb".to_string(), amb.group().clone());
    g.insert("po".to_string(), po.subgroup.group().clone());
    g.insert("po_lift".to_string(), po.ambient_lift.group().clone());
    g.insert("ost".to_string(), ost);
    g.insert("h1".to_string(), h1);
    g.insert("ram".to_string(), ram_group);
    Ok((g, checks))
}

const BRZ_CHECKS: [&str; 3] = ["brz_exact", "cokernel", "po_oracle"];

/// Computes every group of the `S`-BRZ picture for `K/F` and checks the
/// identities between them. Engine failures turn the affected checks into
/// `undecided` rather than aborting.
pub fn brz_verify(field: &NumberField, sub: &NumberField, s: &SSet) -> BrzReport {
    let mut report = BrzReport {
        field: field.to_string(),
        base: sub.to_string(),
        s: s.to_string(),
        groups: BTreeMap::new(),
        checks: vec![],
    };
    let result = s.lift(sub).and_then(|s_f| {
        report.s = s_f.to_string();
        brz_groups(field, sub, &s_f)
    });
    match result {
        Ok((groups, checks)) => {
            report.groups = groups
                .iter()
                .map(|(k, v)| (k.clone(), GroupSummary::of(v)))
                .collect();
            report.checks = checks;
        }
        Err(e) => {
            report.checks = BRZ_CHECKS.iter().map(|n| Check::undecided(n, &e)).collect();
        }
    }
    report
}

/// Trivial rows of the boundary case `F = K`.
pub fn boundary_check(field: &NumberField, s: &SSet) -> Result<Vec<Check>> {
    let s_k = s.lift(field)?;
    let po = relative_polya_group_s(field, field, &s_k)?;
    let whole = po.ambient.group().whole();
    let ost = ostrowski_quotient_s(field, field, &s_k)?;
    Ok(vec![
        Check {
            name: "po_self".into(),
            lhs: big_json(&po.order()),
            rhs: big_json(&order(po.ambient.group())),
            verdict: if po.subgroup.same_as(&whole) {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: None,
        },
        Check::compare("ost_self", &order(&ost), &BigInt::one()),
    ])
}

/// `ε_S(Cl(F)_S)` as a subgroup of `Cl(K)_S`.
pub fn capitulation_image(field: &NumberField, sub: &NumberField, s: &SSet) -> Result<Subgroup> {
    Ok(capitulation(field, sub, &s.lift(sub)?)?.image())
}

/// Builds `count` random Galois-invariant ideals prime to `S` out of
/// Ostrowski ideals over primes below 50 and checks that
/// [`invariant_factorization`] recovers every exponent.
pub fn factorization_roundtrip_check(
    field: &NumberField,
    sub: &NumberField,
    s: &SSet,
    count: usize,
    seed: u64,
) -> Result<Check> {
    let s_f = s.lift(sub)?;
    let mut pool = Vec::new();
    for p in primes_up_to(50) {
        for q in primes_above(sub, p) {
            if s_f.contains(&q) {
                continue;
            }
            let f = split_prime(field, sub, &q)?[0].f;
            pool.push(ostrowski_ideal(field, sub, &q, f)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovered = 0usize;
    for _ in 0..count {
        let mut want: BTreeMap<String, u32> = BTreeMap::new();
        let mut ideal = Ideal::unit(field);
        for _ in 0..rng.gen_range(0..=3) {
            let o = &pool[rng.gen_range(0..pool.len())];
            let n = rng.gen_range(1..=3);
            *want.entry(prime_label(o.base())).or_default() += n;
            ideal = ideal.mul(&o.ideal().pow(n));
        }
        let got: BTreeMap<String, u32> = invariant_factorization(field, sub, &s_f, &ideal)?
            .into_iter()
            .map(|(o, n)| (prime_label(o.base()), n))
            .collect();
        if got == want {
            recovered += 1;
        }
    }
    Ok(Check::compare(
        "factorization_roundtrip",
        &BigInt::from(recovered),
        &BigInt::from(count),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::bigs;
    use crate::ideal::relative_ideal_norm;
    use proptest::prelude::*;
    use num_traits::Zero;

    fn q(d: i64) -> NumberField {
        NumberField::quadratic(d).unwrap()
    }

    fn rat() -> NumberField {
        NumberField::rational()
    }

    fn inf() -> SSet {
        SSet::archimedean(&rat())
    }

    #[test]
    fn ostrowski_examples() {
        let k = q(-5);
        let two = &primes_above(&rat(), 2)[0];
        let three = &primes_above(&rat(), 3)[0];
        let p2 = &primes_above(&k, 2)[0];
        assert_eq!(
            ostrowski_ideal(&k, &rat(), two, 1).unwrap().ideal(),
            p2.ideal()
        );
        let pi3 = ostrowski_ideal(&k, &rat(), three, 1).unwrap();
        assert_eq!(*pi3.ideal(), Ideal::from_int(&k, &BigInt::from(3)));
        assert!(ostrowski_ideal(&k, &rat(), three, 2)
            .unwrap()
            .ideal()
            .is_unit());
    }

    #[test]
    fn invariant_factorization_examples() {
        let k = q(-5);
        let six = Ideal::from_int(&k, &BigInt::from(6));
        let f = invariant_factorization(&k, &rat(), &inf(), &six).unwrap();
        let got: Vec<(u64, u32)> = f.iter().map(|(o, n)| (o.base().p(), *n)).collect();
        assert_eq!(got, vec![(2, 2), (3, 1)]);
        assert!(
            invariant_factorization(&k, &rat(), &inf(), &Ideal::unit(&k))
                .unwrap()
                .is_empty()
        );
        let p3 = primes_above(&k, 3)[0].ideal().clone();
        assert_eq!(
            invariant_factorization(&k, &rat(), &inf(), &p3).unwrap_err(),
            Error::NotInvariant
        );
        let s2 = SSet::above_rational(&rat(), &[2]);
        assert!(matches!(
            invariant_factorization(&k, &rat(), &s2, &six),
            Err(Error::MeetsS(_))
        ));
    }

    #[test]
    fn polya_examples() {
        let k = q(-5);
        let po = relative_polya_group_s(&k, &rat(), &inf()).unwrap();
        assert_eq!(po.subgroup().group().invariants(), &bigs(&[2]));
        let s2 = SSet::above_rational(&rat(), &[2]);
        assert!(relative_polya_group_s(&k, &rat(), &s2)
            .unwrap()
            .subgroup()
            .group()
            .is_trivial());
        let z8 = NumberField::biquadratic(-1, 2).unwrap();
        assert!(relative_polya_group_s(&z8, &rat(), &inf())
            .unwrap()
            .subgroup()
            .group()
            .is_trivial());
    }

    #[test]
    fn ostrowski_quotient_examples() {
        let k = q(-5);
        assert_eq!(
            ostrowski_quotient_s(&k, &rat(), &inf())
                .unwrap()
                .invariants(),
            &bigs(&[2])
        );
        assert!(ostrowski_quotient_s(&k, &k, &inf()).unwrap().is_trivial());
        let big = NumberField::biquadratic(-1, 5).unwrap();
        assert!(ostrowski_quotient_s(&big, &k, &inf()).unwrap().is_trivial());
    }

    #[test]
    fn h1_examples() {
        assert_eq!(
            h1_units(&q(-5), &rat(), &inf()).unwrap().invariants(),
            &bigs(&[2])
        );
        assert_eq!(
            h1_units(&q(5), &rat(), &inf()).unwrap().invariants(),
            &bigs(&[2])
        );
        assert_eq!(
            h1_units(&q(3), &rat(), &inf()).unwrap().invariants(),
            &bigs(&[2, 2])
        );
        assert_eq!(
            h1_units(&q(-1), &rat(), &inf()).unwrap().invariants(),
            &bigs(&[2])
        );
    }

    #[test]
    fn h1_solvers_agree_on_cyclic_inputs() {
        for k in [q(-5), q(5), q(3), q(-1), q(-3), q(10)] {
            for s in [inf(), SSet::above_rational(&rat(), &[2])] {
                let su = s_unit_group(&k, &s).unwrap();
                let a = su.galois_matrix(k.automorphism(1)).unwrap();
                let c = h1_cyclic(su.group(), &a, 2).unwrap();
                let g = h1_involutions(su.group(), &[a]).unwrap();
                assert_eq!(c.invariants(), g.invariants(), "{}", k);
            }
        }
    }

    #[test]
    fn herbrand_examples() {
        for d in [5, 3, -1, -5, 2, -3] {
            assert!(
                herbrand_check(&q(d), &rat(), &inf()).unwrap().passed(),
                "{}",
                d
            );
        }
    }

    #[test]
    fn hilbert94_examples() {
        let c = hilbert94_check(&q(-1), &rat(), &SSet::above_rational(&rat(), &[2])).unwrap();
        assert_eq!(
            (c.lhs.clone(), c.rhs.clone(), c.verdict),
            (json!(4), json!(4), Verdict::Pass)
        );
        let c = hilbert94_check(&q(-5), &rat(), &SSet::above_rational(&rat(), &[2, 5])).unwrap();
        assert_eq!(
            (c.lhs.clone(), c.rhs.clone(), c.verdict),
            (json!(8), json!(8), Verdict::Pass)
        );
        assert!(matches!(
            hilbert94_check(&q(5), &rat(), &inf()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ikp_examples() {
        let f = q(-5);
        let k = NumberField::biquadratic(-1, 5).unwrap();
        let c = ikp_check(&k, &f, &SSet::archimedean(&f)).unwrap();
        assert!(c.passed());
        assert_eq!(c.lhs, json!([2]));
        assert!(
            ikp_check(&f, &rat(), &SSet::above_rational(&rat(), &[2, 5]))
                .unwrap()
                .passed()
        );
        match ikp_check(&f, &rat(), &inf()) {
            Err(Error::Precondition(m)) => assert!(m.starts_with("2 ")),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn brz_examples() {
        let r = brz_verify(&q(-5), &rat(), &inf());
        assert!(r.all_pass(), "{}", r.to_json());
        assert_eq!(r.check("brz_exact").unwrap().lhs, json!(4));
        let r = brz_verify(&q(-5), &rat(), &SSet::above_rational(&rat(), &[2]));
        assert!(r.all_pass(), "{}", r.to_json());
        assert_eq!(r.check("brz_exact").unwrap().lhs, json!(2));
        let r = brz_verify(&q(3), &rat(), &inf());
        assert!(r.all_pass());
        assert_eq!(r.check("brz_exact").unwrap().rhs, json!(4));
        assert!(r.group("ost").unwrap().invariant_factors.is_empty());
    }

    #[test]
    fn filtration_examples() {
        let k = NumberField::biquadratic(-1, 5).unwrap();
        assert!(filtration_check(&k, &q(-5), &inf()).unwrap().passed());
        let k = NumberField::biquadratic(2, -5).unwrap();
        assert!(filtration_check(&k, &q(2), &inf()).unwrap().passed());
        assert!(
            filtration_check(&k, &q(2), &SSet::above_rational(&rat(), &[2]))
                .unwrap()
                .passed()
        );
        // S1 = {∞} ⊆ S2 = {∞, 2} on Q(√-5)/Q
        let a = relative_polya_group_s(&q(-5), &rat(), &inf()).unwrap();
        let b =
            relative_polya_group_s(&q(-5), &rat(), &SSet::above_rational(&rat(), &[2])).unwrap();
        assert!(b.ambient_lift().is_subgroup_of(a.ambient_lift()));
        assert!(filtration_check(&k, &q(3), &inf()).is_err());
    }

    #[test]
    fn unramified_ostrowski_classes_are_capitulated() {
        for (k, f) in [
            (q(-5), rat()),
            (NumberField::biquadratic(2, -5).unwrap(), q(2)),
            (NumberField::biquadratic(-1, 5).unwrap(), q(-5)),
        ] {
            let s = SSet::archimedean(&f);
            let eps = capitulation(&k, &f, &s).unwrap();
            let clk = s_class_group(&k, &s).unwrap();
            let clf = s_class_group(&f, &s).unwrap();
            let ram: Vec<PrimeIdeal> = ramified_primes(&k, &f)
                .unwrap()
                .into_iter()
                .map(|x| x.0)
                .collect();
            for p in primes_up_to(200) {
                for base in primes_above(&f, p) {
                    if ram.contains(&base) || base.norm() > &BigInt::from(200) {
                        continue;
                    }
                    let fr = split_prime(&k, &f, &base).unwrap()[0].f;
                    let pi = ostrowski_ideal(&k, &f, &base, fr).unwrap();
                    assert_eq!(
                        clk.class_of(pi.ideal()).unwrap(),
                        eps.apply(&clf.class_of(base.ideal()).unwrap())
                    );
                }
            }
        }
    }

    #[test]
    fn ramified_generators_have_order_dividing_e() {
        for (k, f) in [
            (q(-5), rat()),
            (q(-21), rat()),
            (NumberField::biquadratic(2, -5).unwrap(), rat()),
        ] {
            let s = inf();
            let po = relative_polya_group_s(&k, &f, &s).unwrap();
            let eps = capitulation(&k, &f, &s).unwrap();
            let ost = po.subgroup().corestrict(&eps).unwrap().cokernel();
            let es: Vec<u32> = ramified_primes(&k, &f)
                .unwrap()
                .iter()
                .map(|x| x.1)
                .collect();
            let pis: Vec<&(String, Vec<BigInt>)> = po
                .generators()
                .iter()
                .filter(|g| g.0.starts_with("Pi"))
                .collect();
            for (g, e) in pis.iter().zip(&es) {
                let c = po.subgroup().coordinates(&g.1).unwrap();
                let img = ost.projection.apply(&c);
                let ord = ost.group.element_order(&img).unwrap();
                assert!((BigInt::from(*e) % ord).is_zero());
            }
        }
    }

    #[test]
    fn polya_is_inside_ambiguous_classes() {
        for (k, f) in [
            (q(-5), rat()),
            (q(-21), rat()),
            (q(10), rat()),
            (NumberField::biquadratic(2, -5).unwrap(), q(-10)),
        ] {
            for s in [inf(), SSet::above_rational(&rat(), &[2])] {
                let po = relative_polya_group_s(&k, &f, &s).unwrap();
                let amb = ambiguous_classes(&k, &f, &s.lift(&f).unwrap()).unwrap();
                assert!(po.subgroup().is_subgroup_of(&amb));
                let proj: Vec<Vec<BigInt>> = po
                    .ambient_lift()
                    .generators()
                    .iter()
                    .map(|g| po.ambient().projection().apply(g))
                    .collect();
                assert!(po.ambient().group().span(&proj).same_as(po.subgroup()));
            }
        }
    }

    #[test]
    fn factorization_roundtrips() {
        for (k, f, s) in [
            (q(-5), rat(), inf()),
            (q(10), rat(), SSet::above_rational(&rat(), &[2])),
            (
                NumberField::biquadratic(-1, 5).unwrap(),
                q(-5),
                SSet::archimedean(&q(-5)),
            ),
        ] {
            assert!(factorization_roundtrip_check(&k, &f, &s, 40, 7)
                .unwrap()
                .passed());
        }
    }

    #[test]
    fn boundary_rows() {
        for k in [q(-5), q(10), NumberField::biquadratic(2, -5).unwrap()] {
            for s in [SSet::archimedean(&k), SSet::above_rational(&k, &[2])] {
                assert!(boundary_check(&k, &s).unwrap().iter().all(Check::passed));
            }
        }
    }

    fn squarefree() -> impl Strategy<Value = i64> {
        (-150i64..150).prop_filter("squarefree", |&d| d != 0 && d != 1 && crate::numfield::is_squarefree(d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ostrowski_ideals_are_invariant_with_expected_norm(
            a in prop::sample::select(vec![-1i64, 2, -2, 3, -3, 5, -5, -7]),
            b in prop::sample::select(vec![-1i64, 2, -2, 3, -3, 5, -5, -7]),
            which in 0usize..4,
            p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29]),
        ) {
            prop_assume!(a != b);
            let Ok(k) = NumberField::biquadratic(a, b) else { return Ok(()) };
            let f = if which == 3 { rat() } else { k.quadratic_subfields()[which].clone() };
            let gal = k.galois_group_over(&f).unwrap();
            for base in primes_above(&f, p) {
                let split = split_prime(&k, &f, &base).unwrap();
                let fr = split[0].f;
                let o = ostrowski_ideal(&k, &f, &base, fr).unwrap();
                prop_assert!(o.ideal().is_invariant_under(&gal));
                // N_{K/F}(Π) = 𝔭^{f·g}
                let norm = relative_ideal_norm(&k, &f, o.ideal()).unwrap();
                prop_assert_eq!(norm, base.ideal().pow(fr * split.len() as u32));
            }
        }

        #[test]
        fn quadratic_identities_hold(d in squarefree(), with_two in any::<bool>()) {
            let s = if with_two { SSet::above_rational(&rat(), &[2]) } else { inf() };
            let r = brz_verify(&q(d), &rat(), &s);
            for name in ["brz_exact", "cokernel", "po_oracle", "herbrand"] {
                prop_assert!(r.check(name).unwrap().passed(), "{} {}", name, r.to_json());
            }
        }

        #[test]
        fn relative_identities_hold(
            a in prop::sample::select(vec![-1i64, 2, -2, 3, -3, 5, -5, -7, 6, -6, 10, 13]),
            b in prop::sample::select(vec![-1i64, 2, -2, 3, -3, 5, -5, -7, 6, -6, 10, 13]),
            which in 0usize..3,
        ) {
            prop_assume!(a != b);
            let Ok(k) = NumberField::biquadratic(a, b) else { return Ok(()) };
            let f = k.quadratic_subfields()[which].clone();
            let r = brz_verify(&k, &f, &SSet::archimedean(&f));
            for name in ["brz_exact", "cokernel", "po_oracle", "herbrand"] {
                prop_assert!(r.check(name).unwrap().passed(), "{} {}", name, r.to_json());
            }
        }
    }
}
