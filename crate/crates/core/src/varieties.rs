//! Solubility pipeline for the open surfaces `y^2 - a z^2 = t^r + k != 0`:
//! quadratic-field data, Hilbert symbols, Hensel lifting, primitive local
//! points at ramified primes, fiber-prime search, and integral point
//! search with an independent direct-search fallback.
//!
//! The pipeline realises the constructive reading of the solubility
//! argument: pick a primitive local point at every ramified prime, glue
//! the `t`-residues by CRT, walk the arithmetic progression until the
//! fiber value is prime, then represent that prime by the form
//! `y^2 - a z^2`. Every returned point is verified in exact integer
//! arithmetic; a budget-exhausted search is a report, never a disproof.

use crate::arith;
use crate::forms;
use crate::{Error, Result};

/// Invariants of `Q(sqrt(a))` needed by the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    pub a: i64,
    pub discriminant: i64,
    /// Ramified primes: the primes dividing the discriminant.
    pub ramified: Vec<u64>,
    pub two_unramified: bool,
    pub class_number: u64,
    pub narrow_class_number: u64,
}

/// Field data for squarefree `a` outside `{0, 1}`.
pub fn quad_field(a: i64) -> Result<QuadField> {
    if a == 0 || a == 1 {
        return Err(Error::Domain(format!("a = {a} does not define a field")));
    }
    if !arith::is_squarefree(a.unsigned_abs()) {
        return Err(Error::Domain(format!("a = {a} is not squarefree")));
    }
    let two_unramified = a.rem_euclid(4) == 1;
    let discriminant = if two_unramified { a } else { 4 * a };
    let mut ramified: Vec<u64> = arith::factorize(a.unsigned_abs())
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    if !two_unramified {
        ramified.push(2);
    }
    ramified.sort_unstable();

    let (class_number, narrow_class_number) = if a < 0 {
        let h = forms::class_number(discriminant)?;
        (h, h)
    } else {
        let h_plus = forms::narrow_class_number(discriminant)?;
        let h = if forms::fundamental_unit_norm(a as u64)? == 1 {
            h_plus / 2
        } else {
            h_plus
        };
        (h, h_plus)
    };

    Ok(QuadField {
        a,
        discriminant,
        ramified,
        two_unramified,
        class_number,
        narrow_class_number,
    })
}

/// Squarefree `d <= bound` with `Q(sqrt(-d))` of (narrow) class number at
/// most 2 and 2 unramified, i.e. `d = 3 (mod 4)`.
pub fn class_list(bound: u64) -> Vec<u64> {
    (3..=bound)
        .filter(|&d| {
            d % 4 == 3
                && arith::is_squarefree(d)
                && forms::class_number(-(d as i64)).map_or(false, |h| h <= 2)
        })
        .collect()
}

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Prime(u64),
}

fn split_valuation(n: i64, p: u64) -> (u32, i64) {
    let mut v = 0u32;
    let mut u = n;
    while u % p as i64 == 0 {
        u /= p as i64;
        v += 1;
    }
    (v, u)
}

/// Hilbert symbol `(a, b)_v`: `1` iff `z^2 = a x^2 + b y^2` has a
/// nontrivial solution over the completion at `v`, by the standard local
/// formulas.
pub fn hilbert_symbol(a: i64, b: i64, place: Place) -> i32 {
    assert!(a != 0 && b != 0, "hilbert symbol needs nonzero arguments");
    match place {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, w) = split_valuation(b, 2);
            let eps = |n: i64| (n.rem_euclid(4) - 1) / 2 % 2; // (n-1)/2 mod 2
            let omega = |n: i64| {
                let n8 = n.rem_euclid(8);
                u64::from(n8 == 3 || n8 == 5) as i64 // (n^2-1)/8 mod 2
            };
            let exponent =
                eps(u) * eps(w) + alpha as i64 * omega(w) + beta as i64 * omega(u);
            if exponent % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Prime(p) => {
            assert!(arith::is_prime(p), "{p} is not prime");
            let (alpha, u) = split_valuation(a, p);
            let (beta, w) = split_valuation(b, p);
            let mut sign = 1i32;
            if alpha % 2 == 1 && beta % 2 == 1 && (p - 1) / 2 % 2 == 1 {
                sign = -sign;
            }
            if beta % 2 == 1 {
                sign *= arith::jacobi(u, p);
            }
            if alpha % 2 == 1 {
                sign *= arith::jacobi(w, p);
            }
            sign
        }
    }
}

/// Product over every relevant place (`p | 2ab` and infinity); equals 1
/// by global reciprocity.
pub fn hilbert_product(a: i64, b: i64) -> i32 {
    let mut product = hilbert_symbol(a, b, Place::Infinity);
    let mut seen = vec![2u64];
    for n in [a, b] {
        for (p, _) in arith::factorize(n.unsigned_abs()) {
            if !seen.contains(&p) {
                seen.push(p);
            }
        }
    }
    for p in seen {
        product *= hilbert_symbol(a, b, Place::Prime(p));
    }
    product
}

fn poly_eval_mod(coeffs: &[i64], x: u64, modulus: u64) -> u64 {
    let mut acc: u64 = 0;
    for &c in coeffs.iter().rev() {
        acc = arith::mul_mod(acc, x, modulus);
        acc = (acc + (c as i128).rem_euclid(modulus as i128) as u64) % modulus;
    }
    acc
}

fn poly_derivative(coeffs: &[i64]) -> Vec<i64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as i64)
        .collect()
}

/// Lift a simple root of `f` mod `p` to a root mod `p^e` by Newton
/// iteration in exact integer arithmetic. `coeffs` are little-endian.
pub fn hensel_lift(coeffs: &[i64], root0: i64, p: u64, e: u32) -> Result<u64> {
    if e == 0 {
        return Err(Error::Domain("lift level e must be >= 1".into()));
    }
    let modulus = p
        .checked_pow(e)
        .ok_or_else(|| Error::Range(format!("{p}^{e} overflows 64 bits")))?;
    let root0 = root0.rem_euclid(p as i64) as u64;
    if poly_eval_mod(coeffs, root0, p) != 0 {
        return Err(Error::LiftFailure(format!(
            "{root0} is not a root of f mod {p}"
        )));
    }
    let derivative = poly_derivative(coeffs);
    let fprime = poly_eval_mod(&derivative, root0, p);
    if fprime == 0 {
        return Err(Error::LiftFailure(format!(
            "f'({root0}) = 0 mod {p}: root is not simple"
        )));
    }
    let fprime_inv = arith::inv_mod(fprime, p).expect("nonzero mod prime");

    // Linear lifting: from a root mod p^j, x + t p^j with
    // t = -(f(x)/p^j) f'(x)^{-1} (mod p) is a root mod p^{j+1}.
    let mut x = root0;
    let mut p_j = 1u64;
    for _ in 1..=e - 1 {
        p_j *= p;
        let p_next = p_j * p;
        let fx = poly_eval_mod(coeffs, x, p_next);
        debug_assert_eq!(fx % p_j, 0);
        let w = fx / p_j;
        let t = arith::mul_mod((p - w % p) % p, fprime_inv, p);
        x += t * p_j;
    }
    if poly_eval_mod(coeffs, x, modulus) != 0 {
        return Err(Error::LiftFailure(format!(
            "lift drifted off the root chain mod {p}^{e}"
        )));
    }
    Ok(x)
}

/// Witness that the fiber value is a unit square at `p`: either an
/// explicit square `s` with `t^r + k = s (mod p)`, or (for `p = 3`,
/// `k = 1 (mod 3)`) a square root of `k` itself with `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalWitness {
    Square { s: u64 },
    SquareRootOfK { y_residue: u64 },
}

/// A primitive local point at a ramified prime: the `t`-residue plus the
/// square witness making `t^r + k` a unit square mod `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalPoint {
    pub p: u64,
    pub t_residue: u64,
    pub witness: LocalWitness,
}

/// Primitive local point at a ramified prime `p` of `Q(sqrt(a))` with
/// `p != 1 (mod r)`: the power map is then a bijection mod `p`, so the
/// case split on `k mod p` always produces a point.
pub fn primitive_local_point(a: i64, r: u64, k: u64, p: u64) -> Result<LocalPoint> {
    if !arith::is_prime(p) || p == 2 {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    if a % p as i64 != 0 {
        return Err(Error::Precondition(format!("{p} is not ramified for a = {a}")));
    }
    if p % r == 1 {
        return Err(Error::Precondition(format!(
            "p = {p} = 1 (mod {r}): the power map is not a bijection"
        )));
    }
    let k_mod = k % p;
    let s = if k_mod != 1 {
        1
    } else if p >= 5 {
        4
    } else {
        // p = 3, k = 1 (mod 3): fall back to lifting y^2 = k at t = 0.
        let point = LocalPoint {
            p,
            t_residue: 0,
            witness: LocalWitness::SquareRootOfK { y_residue: 1 },
        };
        debug_assert_eq!((1 * 1) % 3, k_mod);
        return Ok(point);
    };
    // t = (s - k)^(1/r) through the inverse exponent mod p - 1.
    let d = arith::inv_mod(r % (p - 1), p - 1).expect("gcd(r, p-1) = 1");
    let target = (s + p - k_mod) % p;
    let t_residue = arith::pow_mod(target, d, p);
    debug_assert_eq!((arith::pow_mod(t_residue, r, p) + k_mod) % p, s % p);
    Ok(LocalPoint {
        p,
        t_residue,
        witness: LocalWitness::Square { s },
    })
}

/// Least `n >= 1` with `n = n0 (mod m0)` and `n^r + k` prime, up to
/// `n_max`; returns the prime alongside.
pub fn find_fiber_prime(
    r: u64,
    k: u64,
    n0: u64,
    m0: u64,
    n_max: u64,
) -> Option<(u64, u64)> {
    let start = if n0 % m0 == 0 { m0 } else { n0 % m0 };
    fiber_prime_from(r, k, start, m0, n_max)
}

/// Same walk from an absolute starting position (no reduction mod `m0`).
fn fiber_prime_from(r: u64, k: u64, start: u64, m0: u64, n_max: u64) -> Option<(u64, u64)> {
    let mut n = start;
    while n <= n_max {
        match (0..r).try_fold(1u64, |acc, _| acc.checked_mul(n)) {
            Some(power) => match power.checked_add(k) {
                Some(fiber) if arith::is_prime(fiber) => return Some((n, fiber)),
                Some(_) => {}
                None => return None,
            },
            None => return None,
        }
        n += m0;
    }
    None
}

/// Exhaustive representation `y^2 - a z^2 = q` for `a < 0`: a complete
/// decision procedure, since `z` is bounded by `sqrt(q / |a|)`.
pub fn represent_by_form(a: i64, q: u64) -> Option<(i64, i64)> {
    assert!(a < 0, "exhaustive representation needs a < 0");
    let abs_a = a.unsigned_abs();
    let mut z = 0u64;
    while abs_a * z * z <= q {
        let y_sq = q - abs_a * z * z;
        let y = arith::integer_kth_root(y_sq, 2);
        if y * y == y_sq {
            return Some((y as i64, z as i64));
        }
        z += 1;
    }
    None
}

/// Budgeted representation search for `a > 0` (inconclusive on failure).
fn represent_bounded(a: i64, q: i64, z_bound: u64) -> Option<(i64, i64)> {
    debug_assert!(a > 0);
    for z in 0..=z_bound as i64 {
        let rhs = q as i128 + a as i128 * z as i128 * z as i128;
        if rhs < 0 {
            continue;
        }
        let y = arith::integer_kth_root(rhs as u64, 2) as i64;
        if y as i128 * y as i128 == rhs {
            return Some((y, z));
        }
    }
    None
}

/// An instance `(a, r, k)` of `y^2 - a z^2 = t^r + k != 0`, with the
/// admissibility flags recomputed from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyInstance {
    pub a: i64,
    pub r: u64,
    pub k: u64,
    field: QuadField,
    order_admissible: bool,
}

impl VarietyInstance {
    pub fn new(a: i64, r: u64, k: u64) -> Result<Self> {
        if !arith::is_prime(r) {
            return Err(Error::Domain(format!("r = {r} must be prime")));
        }
        if k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        let field = quad_field(a)?;
        let order_admissible = arith::factorize(a.unsigned_abs())
            .iter()
            .all(|&(p, _)| p % r != 1);
        Ok(VarietyInstance {
            a,
            r,
            k,
            field,
            order_admissible,
        })
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    /// No prime of `a` is `1 (mod r)`.
    pub fn order_admissible(&self) -> bool {
        self.order_admissible
    }

    pub fn two_unramified(&self) -> bool {
        self.field.two_unramified
    }

    pub fn admissible(&self) -> bool {
        self.order_admissible && self.field.two_unramified
    }
}

/// A point on the surface, verified exactly on construction paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegralPoint {
    pub y: i64,
    pub z: i64,
    pub t: i64,
}

impl IntegralPoint {
    /// Exact check of `y^2 - a z^2 = t^r + k != 0`.
    pub fn verify(&self, inst: &VarietyInstance) -> bool {
        let lhs = self.y as i128 * self.y as i128 - inst.a as i128 * self.z as i128 * self.z as i128;
        let mut fiber = 1i128;
        for _ in 0..inst.r {
            fiber *= self.t as i128;
        }
        fiber += inst.k as i128;
        lhs == fiber && fiber != 0
    }
}

/// Search budgets for the two point-search paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Bound on `n` for the fiber-prime walk.
    pub fiber_n_max: u64,
    /// Bound on `|t|` for the direct fallback search.
    pub fallback_t_bound: u64,
    /// Run the fallback even when the pipeline succeeds (cross-check).
    pub always_run_fallback: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            fiber_n_max: 2000,
            fallback_t_bound: 60,
            always_run_fallback: false,
        }
    }
}

/// Outcome of one search path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOutcome {
    Found(IntegralPoint),
    /// Budget exhausted; carries a short diagnostic. Never a disproof.
    Exhausted(String),
}

impl PathOutcome {
    pub fn point(&self) -> Option<IntegralPoint> {
        match self {
            PathOutcome::Found(pt) => Some(*pt),
            PathOutcome::Exhausted(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub pipeline: PathOutcome,
    pub fallback: Option<PathOutcome>,
    pub point: Option<IntegralPoint>,
}

/// Compose local points, CRT, fiber-prime search and form representation;
/// fall back to a direct bounded search when the pipeline cannot finish
/// within budget.
pub fn integral_point_search(inst: &VarietyInstance, budget: &SearchBudget) -> Result<SolveReport> {
    if !inst.order_admissible() {
        return Err(Error::Precondition(format!(
            "some prime of a = {} is 1 (mod {})",
            inst.a, inst.r
        )));
    }
    if !inst.two_unramified() {
        return Err(Error::Precondition(format!(
            "2 ramifies in Q(sqrt({}))",
            inst.a
        )));
    }

    let pipeline = run_pipeline(inst, budget)?;
    let fallback = if pipeline.point().is_none() || budget.always_run_fallback {
        Some(run_fallback(inst, budget))
    } else {
        None
    };

    let point = pipeline
        .point()
        .or_else(|| fallback.as_ref().and_then(|f| f.point()));
    if let Some(pt) = point {
        assert!(pt.verify(inst), "search returned an unverified point");
    }
    Ok(SolveReport {
        pipeline,
        fallback,
        point,
    })
}

fn run_pipeline(inst: &VarietyInstance, budget: &SearchBudget) -> Result<PathOutcome> {
    // Level-1 congruences from the primitive local points.
    let locals: Vec<LocalPoint> = inst
        .field
        .ramified
        .iter()
        .map(|&p| primitive_local_point(inst.a, inst.r, inst.k, p))
        .collect::<Result<_>>()?;

    // Adaptive congruence level: level 1 always works; level 2 is tried
    // only if the level-1 progression runs dry within budget.
    for level in 1..=2u32 {
        let Some(congruences) = congruences_at_level(inst, &locals, level) else {
            continue;
        };
        let (n0, m0) = crt_combine(&congruences)?;
        if let Some(outcome) = walk_progression(inst, n0, m0, budget)? {
            return Ok(PathOutcome::Found(outcome));
        }
    }
    Ok(PathOutcome::Exhausted(format!(
        "no representable fiber prime with n <= {}",
        budget.fiber_n_max
    )))
}

/// The `t`-congruence at each ramified prime, raised to `p^level` when a
/// unit-square fiber value survives at that level.
fn congruences_at_level(
    inst: &VarietyInstance,
    locals: &[LocalPoint],
    level: u32,
) -> Option<Vec<(u64, u64)>> {
    let mut out = Vec::with_capacity(locals.len());
    for local in locals {
        let p = local.p;
        if level == 1 {
            out.push((local.t_residue, p));
            continue;
        }
        let modulus = p.pow(level);
        let lifted = (0..p.pow(level - 1))
            .map(|j| local.t_residue + j * p)
            .find(|&t| {
                let mut fiber = inst.k % modulus;
                fiber = (fiber + arith::pow_mod(t, inst.r, modulus)) % modulus;
                fiber % p != 0 && arith::jacobi(fiber as i64, p) == 1
            });
        match lifted {
            Some(t) => out.push((t, modulus)),
            None => return None,
        }
    }
    Some(out)
}

fn crt_combine(congruences: &[(u64, u64)]) -> Result<(u64, u64)> {
    let mut residue = 0u64;
    let mut modulus = 1u64;
    for &(r2, m2) in congruences {
        let combined = modulus
            .checked_mul(m2)
            .ok_or_else(|| Error::Range("CRT modulus overflows".into()))?;
        // residue + modulus * t = r2 (mod m2)
        let inv = arith::inv_mod(modulus % m2, m2)
            .ok_or_else(|| Error::Domain("CRT moduli must be coprime".into()))?;
        let diff = (r2 + m2 - residue % m2) % m2;
        let t = arith::mul_mod(diff, inv, m2);
        residue += modulus * t;
        modulus = combined;
    }
    Ok((residue % modulus, modulus))
}

/// Walk `n = n0 (mod m0)` looking for a fiber prime representable by the
/// form; skips primes in the wrong form class and keeps going.
fn walk_progression(
    inst: &VarietyInstance,
    n0: u64,
    m0: u64,
    budget: &SearchBudget,
) -> Result<Option<IntegralPoint>> {
    let mut start = if n0 % m0 == 0 { m0 } else { n0 % m0 };
    while start <= budget.fiber_n_max {
        let Some((n, q)) = fiber_prime_from(inst.r, inst.k, start, m0, budget.fiber_n_max) else {
            return Ok(None);
        };
        if arith::gcd(q, inst.a.unsigned_abs()) != 1 {
            return Err(Error::IdentityViolation(format!(
                "fiber prime {q} shares a factor with a = {}: local data violated",
                inst.a
            )));
        }
        let representation = if inst.a < 0 {
            represent_by_form(inst.a, q)
        } else {
            represent_bounded(inst.a, q as i64, budget.fiber_n_max)
        };
        if let Some((y, z)) = representation {
            return Ok(Some(IntegralPoint {
                y,
                z,
                t: n as i64,
            }));
        }
        start = n + m0;
    }
    Ok(None)
}

fn run_fallback(inst: &VarietyInstance, budget: &SearchBudget) -> PathOutcome {
    let bound = budget.fallback_t_bound as i64;
    // 0, 1, -1, 2, -2, ...
    let candidates = std::iter::once(0i64)
        .chain((1..=bound).flat_map(|t| [t, -t]));
    for t in candidates {
        let mut fiber = 1i128;
        for _ in 0..inst.r {
            fiber *= t as i128;
        }
        fiber += inst.k as i128;
        if fiber == 0 || fiber.unsigned_abs() > u64::MAX as u128 {
            continue;
        }
        let representation = if inst.a < 0 {
            if fiber < 0 {
                continue;
            }
            represent_by_form(inst.a, fiber as u64)
        } else {
            represent_bounded(inst.a, fiber as i64, budget.fallback_t_bound)
        };
        if let Some((y, z)) = representation {
            return PathOutcome::Found(IntegralPoint { y, z, t });
        }
    }
    PathOutcome::Exhausted(format!("no point with |t| <= {bound}"))
}

/// Outcome of the three-term representation scan
/// `k = n1^2 + d n2^2 + n3^r`.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub d: u64,
    pub r: u64,
    pub k_max: u64,
    pub rows: Vec<DensityRow>,
    pub representable: u64,
    pub fraction: f64,
    pub exceptions: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DensityRow {
    pub k: u64,
    pub witness: Option<(u64, u64, i64)>,
}

/// Fraction of `k <= k_max` expressible as `n1^2 + d n2^2 + n3^r` with
/// `n3 in [-ceil((b k_max)^(1/r)), floor(k_max^(1/r))]` and exhaustive
/// `(n1, n2)`.
pub fn density_report(d: u64, r: u64, k_max: u64, b: f64) -> Result<DensityReport> {
    if d == 0 || !arith::is_squarefree(d) || d % 4 != 3 {
        return Err(Error::Precondition(format!(
            "d = {d} is not squarefree = 3 (mod 4)"
        )));
    }
    if forms::class_number(-(d as i64))? > 2 {
        return Err(Error::Precondition(format!(
            "Q(sqrt(-{d})) has class number above 2"
        )));
    }
    if !arith::is_prime(r)
        || arith::factorize(d).iter().any(|&(p, _)| p % r == 1)
    {
        return Err(Error::Precondition(format!(
            "r = {r} is not admissible for d = {d}"
        )));
    }
    if b <= 0.0 {
        return Err(Error::Domain("negative-side scale b must be positive".into()));
    }
    if k_max == 0 {
        return Ok(DensityReport {
            d,
            r,
            k_max,
            rows: Vec::new(),
            representable: 0,
            fraction: 0.0,
            exceptions: Vec::new(),
        });
    }

    let n3_min = -(ceil_root((b * k_max as f64).ceil() as u64, r as u32) as i64);
    let n3_max = arith::integer_kth_root(k_max, r as u32) as i64;
    let reach = k_max + n3_min.unsigned_abs().pow(r as u32);

    // Witness table for n1^2 + d n2^2 <= reach.
    let mut witnesses: Vec<Option<(u32, u32)>> = vec![None; reach as usize + 1];
    let mut n1 = 0u64;
    while n1 * n1 <= reach {
        let mut n2 = 0u64;
        while n1 * n1 + d * n2 * n2 <= reach {
            let v = (n1 * n1 + d * n2 * n2) as usize;
            if witnesses[v].is_none() {
                witnesses[v] = Some((n1 as u32, n2 as u32));
            }
            n2 += 1;
        }
        n1 += 1;
    }

    let mut rows = Vec::with_capacity(k_max as usize);
    let mut exceptions = Vec::new();
    let mut representable = 0u64;
    for k in 1..=k_max {
        let mut witness = None;
        for n3 in n3_min..=n3_max {
            let cube = n3.pow(r as u32); // r odd prime keeps the sign
            let v = k as i64 - cube;
            if v < 0 || v as u64 > reach {
                continue;
            }
            if let Some((n1, n2)) = witnesses[v as usize] {
                witness = Some((n1 as u64, n2 as u64, n3));
                break;
            }
        }
        if witness.is_some() {
            representable += 1;
        } else {
            exceptions.push(k);
        }
        rows.push(DensityRow { k, witness });
    }

    Ok(DensityReport {
        d,
        r,
        k_max,
        rows,
        representable,
        fraction: representable as f64 / k_max as f64,
        exceptions,
    })
}

fn ceil_root(n: u64, k: u32) -> u64 {
    let floor = arith::integer_kth_root(n, k);
    if floor.pow(k) == n {
        floor
    } else {
        floor + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_field_fixtures() {
        let f = quad_field(-15).unwrap();
        assert_eq!(f.discriminant, -15);
        assert_eq!(f.ramified, vec![3, 5]);
        assert!(f.two_unramified);
        assert_eq!(f.class_number, 2);
        assert_eq!(f.narrow_class_number, 2);

        assert_eq!(quad_field(-3).unwrap().class_number, 1);

        let f = quad_field(-5).unwrap();
        assert_eq!(f.discriminant, -20);
        assert!(!f.two_unramified);
        assert_eq!(f.ramified, vec![2, 5]);

        // Real field: Q(sqrt(3)) has h = 1, unit norm +1, h+ = 2.
        let f = quad_field(3).unwrap();
        assert_eq!(f.class_number, 1);
        assert_eq!(f.narrow_class_number, 2);

        assert!(quad_field(0).is_err());
        assert!(quad_field(12).is_err());
    }

    #[test]
    fn class_list_fixtures() {
        assert_eq!(class_list(20), vec![3, 7, 11, 15, 19]);
        assert_eq!(class_list(2), Vec::<u64>::new());
    }

    #[test]
    fn hilbert_symbol_fixtures() {
        for place in [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
            assert_eq!(hilbert_symbol(1, 5, place), 1);
        }
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(2)), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinity), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(3)), 1);
        assert_eq!(hilbert_symbol(2, 7, Place::Prime(7)), 1); // 2 is a QR mod 7
        assert_eq!(hilbert_symbol(3, 7, Place::Prime(7)), -1);
    }

    #[test]
    fn hilbert_reciprocity_randomish_pairs() {
        for a in [-50i64, -37, -10, -3, -1, 2, 5, 24, 49] {
            for b in [-49i64, -15, -2, 1, 3, 30, 50] {
                assert_eq!(hilbert_product(a, b), 1, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn hilbert_symbol_matches_local_solubility_oracle() {
        // Exhaustive primitive-solution search for z^2 = a x^2 + b y^2
        // mod p^e with e = 1 + 2 v_p(4ab).
        fn oracle(a: i64, b: i64, p: u64) -> bool {
            let vp = |n: i64| split_valuation(n, p).0;
            let e = 1 + 2 * vp(4 * a * b);
            let pe = p.pow(e);
            let aa = (a as i128).rem_euclid(pe as i128) as u64;
            let bb = (b as i128).rem_euclid(pe as i128) as u64;
            let mut squares_any = vec![false; pe as usize];
            let mut squares_unit = vec![false; pe as usize];
            for z in 0..pe {
                let zz = arith::mul_mod(z, z, pe) as usize;
                squares_any[zz] = true;
                if z % p != 0 {
                    squares_unit[zz] = true;
                }
            }
            for x in 0..pe {
                for y in 0..pe {
                    let v = (arith::mul_mod(aa, arith::mul_mod(x, x, pe), pe)
                        + arith::mul_mod(bb, arith::mul_mod(y, y, pe), pe))
                        % pe;
                    let primitive_xy = x % p != 0 || y % p != 0;
                    if primitive_xy && squares_any[v as usize] {
                        return true;
                    }
                    if squares_unit[v as usize] {
                        return true;
                    }
                }
            }
            false
        }
        for (a, b) in [
            (1i64, 1i64),
            (-1, -1),
            (-1, 2),
            (2, 3),
            (3, 5),
            (-2, 5),
            (6, -10),
            (7, 7),
        ] {
            for p in [2u64, 3, 5, 7] {
                let e = 1 + 2 * split_valuation(4 * a * b, p).0;
                if p.pow(e) > 1000 {
                    continue; // keep the O(p^2e) oracle quick here
                }
                assert_eq!(
                    hilbert_symbol(a, b, Place::Prime(p)) == 1,
                    oracle(a, b, p),
                    "a={a} b={b} p={p}"
                );
            }
        }
    }

    #[test]
    fn hensel_lift_fixtures() {
        // t^3 - 3 has the simple root 2 mod 5.
        let root = hensel_lift(&[-3, 0, 0, 1], 2, 5, 3).unwrap();
        assert_eq!(arith::pow_mod(root, 3, 125), 3 % 125);
        assert_eq!(root % 5, 2);

        assert_eq!(hensel_lift(&[-3, 0, 0, 1], 2, 5, 1).unwrap(), 2);

        // t^2 at 0 mod 3: derivative vanishes.
        assert!(matches!(
            hensel_lift(&[0, 0, 1], 0, 3, 2),
            Err(Error::LiftFailure(_))
        ));
        // Not a root at all.
        assert!(hensel_lift(&[1, 0, 1], 1, 5, 2).is_err());
    }

    #[test]
    fn local_point_fixtures() {
        // k != 1 mod 3: square 1, t^5 = -1 mod 3 gives t = 2.
        let lp = primitive_local_point(-3, 5, 2, 3).unwrap();
        assert_eq!(lp.t_residue, 2);
        assert_eq!(lp.witness, LocalWitness::Square { s: 1 });

        // k = 1 mod 5, p = 5: square 4.
        let lp = primitive_local_point(-15, 3, 6, 5).unwrap();
        assert_eq!(lp.witness, LocalWitness::Square { s: 4 });
        assert_eq!((arith::pow_mod(lp.t_residue, 3, 5) + 6) % 5, 4);

        // p = 3, k = 1 mod 3: the y-branch.
        let lp = primitive_local_point(-3, 5, 7, 3).unwrap();
        assert_eq!(lp.witness, LocalWitness::SquareRootOfK { y_residue: 1 });
        assert_eq!(lp.t_residue, 0);

        assert!(primitive_local_point(-3, 5, 2, 5).is_err()); // 5 not ramified
        assert!(primitive_local_point(-7, 3, 2, 7).is_err()); // 7 = 1 mod 3
    }

    #[test]
    fn local_point_is_unit_square() {
        for (a, r) in [(-3i64, 5u64), (-15, 3), (-15, 5), (-11, 3)] {
            for k in 1..=60u64 {
                for &(p, _) in &arith::factorize(a.unsigned_abs()) {
                    let lp = primitive_local_point(a, r, k, p).unwrap();
                    match lp.witness {
                        LocalWitness::Square { s } => {
                            assert_eq!(
                                (arith::pow_mod(lp.t_residue, r, p) + k % p) % p,
                                s % p,
                                "a={a} r={r} k={k} p={p}"
                            );
                            assert_ne!(s % p, 0);
                        }
                        LocalWitness::SquareRootOfK { y_residue } => {
                            assert_eq!(
                                arith::mul_mod(y_residue, y_residue, p),
                                k % p,
                                "a={a} r={r} k={k} p={p}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fiber_prime_fixtures() {
        assert_eq!(find_fiber_prime(3, 1, 1, 2, 10), Some((1, 2)));
        // k = 7, m0 = 1: 1^3+7 = 8, 2^3+7 = 15, 3^3+7 = 34, 4^3+7 = 71.
        assert_eq!(find_fiber_prime(3, 7, 0, 1, 10), Some((4, 71)));
        // Parity obstruction: odd n gives even fiber > 2 for k = 7 odd,
        // so the even-n class with even fiber values never yields a prime.
        assert_eq!(find_fiber_prime(3, 7, 1, 2, 500), None);
    }

    #[test]
    fn representation_fixtures() {
        assert_eq!(represent_by_form(-3, 7), Some((2, 1)));
        assert_eq!(represent_by_form(-3, 5), None);
        assert_eq!(represent_by_form(-3, 1), Some((1, 0)));
    }

    #[test]
    fn instance_flags_recomputed() {
        let inst = VarietyInstance::new(-3, 5, 2).unwrap();
        assert!(inst.admissible());
        // 7 = 1 (mod 3): order flag must come out false.
        let inst = VarietyInstance::new(-7, 3, 2).unwrap();
        assert!(!inst.order_admissible());
        assert!(inst.two_unramified());
        // -5 = 3 (mod 4): 2 ramifies.
        let inst = VarietyInstance::new(-5, 3, 2).unwrap();
        assert!(!inst.two_unramified());
    }

    #[test]
    fn point_search_fixtures() {
        // k = 1 = 0^5 + 1 = 1 - (-3) * 0: the fallback's t = 0 point.
        let inst = VarietyInstance::new(-3, 5, 1).unwrap();
        let report = integral_point_search(&inst, &SearchBudget::default()).unwrap();
        let pt = report.point.expect("point expected");
        assert!(pt.verify(&inst));

        // Hand point (2, 1, 1): 4 + 3 = 7 = 1 + 6.
        let inst = VarietyInstance::new(-3, 5, 6).unwrap();
        let report = integral_point_search(&inst, &SearchBudget::default()).unwrap();
        let pt = report.point.expect("point expected");
        assert!(pt.verify(&inst));
        assert_eq!(report.pipeline.point(), Some(IntegralPoint { y: 2, z: 1, t: 1 }));

        // Inadmissible order: precondition error.
        let inst = VarietyInstance::new(-7, 3, 2).unwrap();
        assert!(matches!(
            integral_point_search(&inst, &SearchBudget::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pipeline_and_fallback_agree_when_both_succeed() {
        let budget = SearchBudget {
            always_run_fallback: true,
            ..Default::default()
        };
        for (a, r) in [(-3i64, 3u64), (-3, 5), (-11, 3), (-15, 3), (-15, 5)] {
            for k in 1..=25u64 {
                let inst = VarietyInstance::new(a, r, k).unwrap();
                let report = integral_point_search(&inst, &budget).unwrap();
                if let Some(pt) = report.pipeline.point() {
                    assert!(pt.verify(&inst), "pipeline a={a} r={r} k={k}");
                }
                if let Some(pt) = report.fallback.as_ref().and_then(|f| f.point()) {
                    assert!(pt.verify(&inst), "fallback a={a} r={r} k={k}");
                }
            }
        }
    }

    #[test]
    fn density_report_fixtures() {
        let report = density_report(3, 5, 10, 2.0).unwrap();
        assert_eq!(report.rows.len(), 10);
        // k = 1 = 1 + 0 + 0^5.
        assert!(report.rows[0].witness.is_some());
        for row in &report.rows {
            if let Some((n1, n2, n3)) = row.witness {
                let value = (n1 * n1 + 3 * n2 * n2) as i64 + n3.pow(5);
                assert_eq!(value, row.k as i64);
            }
        }
        assert_eq!(report.representable + report.exceptions.len() as u64, 10);

        let empty = density_report(3, 5, 0, 2.0).unwrap();
        assert!(empty.rows.is_empty());

        assert!(density_report(5, 3, 10, 2.0).is_err()); // 5 = 1 mod 4
        assert!(density_report(3, 2, 10, 2.0).is_err()); // 3 = 1 mod 2
    }
}
