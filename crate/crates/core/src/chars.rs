//! Dirichlet characters of exact prime order `r` modulo squarefree `q`
//! whose prime factors all satisfy `p = 1 (mod r)`, i.e. split completely
//! in the `r`-th cyclotomic field.
//!
//! A character is stored per prime factor as a pair (residue system,
//! weight `w in [1, r-1]`); its value at `n` is the `r`-th root of unity
//! with exponent `sum_p w_p * nu_p(n) (mod r)`. Values are kept as
//! exponents in `Z/r` — exact arithmetic — and only become complex
//! numbers at summation boundaries (Gauss sums, partial-sum walks).

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{self, ResidueSystem};
use crate::{Error, Result};

/// Default character orders scanned by the Polya-Vinogradov check.
pub const DEFAULT_PV_ORDERS: [u64; 4] = [2, 3, 5, 7];

/// An `r`-th root of unity, or the absorbing zero that characters take on
/// arguments sharing a factor with the modulus. Multiplication adds
/// exponents mod `r`; zero absorbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnityValue {
    order: u64,
    exponent: Option<u64>,
}

impl UnityValue {
    pub fn zero(order: u64) -> Self {
        UnityValue {
            order,
            exponent: None,
        }
    }

    pub fn root(order: u64, exponent: u64) -> Self {
        assert!(order > 0);
        UnityValue {
            order,
            exponent: Some(exponent % order),
        }
    }

    pub fn one(order: u64) -> Self {
        Self::root(order, 0)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Exponent in `[0, order)`, or `None` for the zero element.
    pub fn exponent(&self) -> Option<u64> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    pub fn mul(self, other: UnityValue) -> UnityValue {
        assert_eq!(self.order, other.order, "mixed unity orders");
        match (self.exponent, other.exponent) {
            (Some(a), Some(b)) => UnityValue::root(self.order, (a + b) % self.order),
            _ => UnityValue::zero(self.order),
        }
    }

    pub fn pow(self, j: u64) -> UnityValue {
        match self.exponent {
            Some(e) => UnityValue::root(self.order, arith::mul_mod(e, j % self.order, self.order)),
            None => self,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self.exponent {
            None => Complex64::new(0.0, 0.0),
            Some(e) => Complex64::from_polar(1.0, TAU * e as f64 / self.order as f64),
        }
    }
}

/// `e(x) = exp(2 pi i x)`.
pub fn unit_circle(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

#[derive(Debug, Clone)]
struct CharComponent {
    rs: Arc<ResidueSystem>,
    weight: u64,
}

/// A primitive Dirichlet character of exact order `r` and squarefree
/// conductor `q`, all of whose prime factors split in `Q(zeta_r)`.
#[derive(Debug, Clone)]
pub struct OrderRCharacter {
    r: u64,
    q: u64,
    components: Vec<CharComponent>,
}

impl PartialEq for OrderRCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.label() == other.label()
    }
}

impl Eq for OrderRCharacter {}

impl PartialOrd for OrderRCharacter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderRCharacter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.label().cmp(&other.label())
    }
}

impl OrderRCharacter {
    pub fn order(&self) -> u64 {
        self.r
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Canonical `(p, g, w)` triples, ascending in `p`. Two characters are
    /// equal as functions iff their labels agree.
    pub fn label(&self) -> Vec<(u64, u64, u64)> {
        self.components
            .iter()
            .map(|c| (c.rs.prime(), c.rs.generator(), c.weight))
            .collect()
    }

    /// Character value at `n` as an exponent in `Z/r` (zero element when
    /// `gcd(n, q) > 1`). Negative arguments are reduced mod `q` first.
    pub fn eval(&self, n: i64) -> UnityValue {
        let n = n.rem_euclid(self.q as i64) as u64;
        let mut exponent = 0u64;
        for c in &self.components {
            let p = c.rs.prime();
            let residue = n % p;
            if residue == 0 {
                return UnityValue::zero(self.r);
            }
            let nu = c.rs.discrete_log(residue).expect("residue is a unit");
            exponent = (exponent + arith::mul_mod(c.weight, nu % self.r, self.r)) % self.r;
        }
        UnityValue::root(self.r, exponent)
    }

    pub fn eval_complex(&self, n: i64) -> Complex64 {
        self.eval(n).to_complex()
    }
}

/// True when `q` is squarefree and every prime factor is `1 (mod r)`, so
/// that exact-order-`r` characters of conductor `q` exist.
pub fn admissible_modulus(q: u64, r: u64) -> bool {
    if q < 2 {
        return false;
    }
    let factors = arith::factorize(q);
    factors.iter().all(|&(p, e)| e == 1 && p % r == 1)
}

/// Enumerate every primitive Dirichlet character of exact order `r`
/// (prime) and conductor `q`.
///
/// Returns the empty list when some prime factor of `q` is not
/// `1 (mod r)`: no such character exists then, and conductors `p^a` with
/// `a >= 2` never carry primitive exact-order-`r` characters at all.
/// Enumeration order is lexicographic in the per-prime weights, primes
/// ascending, so the labelling is reproducible across modules.
pub fn enumerate_order_r(q: u64, r: u64) -> Result<Vec<OrderRCharacter>> {
    if !arith::is_prime(r) {
        return Err(Error::Domain(format!("character order {r} must be prime")));
    }
    if q == 0 {
        return Err(Error::Domain("modulus 0".into()));
    }
    let factors = arith::factorize(q);
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(Error::Domain(format!("modulus {q} is not squarefree")));
    }
    if q == 1 || factors.iter().any(|&(p, _)| p % r != 1) {
        return Ok(Vec::new());
    }

    let systems: Vec<Arc<ResidueSystem>> = factors
        .iter()
        .map(|&(p, _)| ResidueSystem::new(p).map(Arc::new))
        .collect::<Result<_>>()?;

    let s = systems.len();
    let choices = r - 1;
    let total = (choices as usize).pow(s as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut weights = vec![0u64; s];
        // Most significant digit corresponds to the smallest prime.
        for slot in (0..s).rev() {
            weights[slot] = 1 + (rem % choices as usize) as u64;
            rem /= choices as usize;
        }
        let components = systems
            .iter()
            .zip(&weights)
            .map(|(rs, &weight)| CharComponent {
                rs: Arc::clone(rs),
                weight,
            })
            .collect();
        out.push(OrderRCharacter {
            r,
            q,
            components,
        });
    }
    Ok(out)
}

/// Gauss sum `tau(chi) = sum_{n=1}^{q} chi(n) e(n/q)`.
pub fn gauss_sum(chi: &OrderRCharacter) -> Complex64 {
    let q = chi.modulus();
    (1..=q)
        .map(|n| chi.eval_complex(n as i64) * unit_circle(n as f64 / q as f64))
        .sum()
}

/// Gauss sum of the principal character mod `q`; equals `mu(q)` for
/// squarefree `q` (it is the Ramanujan sum `c_q(1)`).
pub fn gauss_sum_principal(q: u64) -> Complex64 {
    assert!(q >= 1);
    (1..=q)
        .filter(|&n| arith::gcd(n, q) == 1)
        .map(|n| unit_circle(n as f64 / q as f64))
        .sum()
}

/// Largest ratio `|sum_{M < n <= M+N} chi(n)| / (sqrt(q) log q)` over all
/// primitive non-principal characters of the configured orders with
/// modulus `<= q_max` and all intervals `(M, M+N]` inside `[1, 2q]`.
///
/// The interval maximum is the diameter of the prefix-sum walk, computed
/// from its convex hull rather than by scanning all O(q^2) pairs.
pub fn pv_max_ratio(q_max: u64) -> f64 {
    pv_max_ratio_with_orders(q_max, &DEFAULT_PV_ORDERS)
}

pub fn pv_max_ratio_with_orders(q_max: u64, orders: &[u64]) -> f64 {
    let mut best = 0.0f64;
    for &r in orders {
        for q in 3..=q_max {
            if !admissible_modulus(q, r) {
                continue;
            }
            let bound = (q as f64).sqrt() * (q as f64).ln();
            for chi in enumerate_order_r(q, r).expect("admissible modulus") {
                let mut walk = Vec::with_capacity(2 * q as usize + 1);
                let mut acc = Complex64::new(0.0, 0.0);
                walk.push((acc.re, acc.im));
                for n in 1..=2 * q {
                    acc += chi.eval_complex(n as i64);
                    walk.push((acc.re, acc.im));
                }
                let ratio = point_set_diameter(&walk) / bound;
                best = best.max(ratio);
            }
        }
    }
    best
}

/// Diameter of a planar point set via convex hull.
fn point_set_diameter(points: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            let dx = hull[i].0 - hull[j].0;
            let dy = hull[i].1 - hull[j].1;
            best = best.max(dx * dx + dy * dy);
        }
    }
    best.sqrt()
}

fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_value_arithmetic() {
        let a = UnityValue::root(3, 1);
        let b = UnityValue::root(3, 2);
        assert_eq!(a.mul(b), UnityValue::one(3));
        assert!(a.mul(UnityValue::zero(3)).is_zero());
        assert_eq!(a.pow(5), UnityValue::root(3, 2));
        assert!((UnityValue::root(3, 1).to_complex().norm() - 1.0).abs() < 1e-15);
        assert_eq!(UnityValue::zero(3).to_complex().norm(), 0.0);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_order_r(7, 3).unwrap().len(), 2);
        assert!(enumerate_order_r(5, 3).unwrap().is_empty());
        assert_eq!(enumerate_order_r(91, 3).unwrap().len(), 4);
        assert_eq!(enumerate_order_r(11, 5).unwrap().len(), 4);
        assert!(enumerate_order_r(1, 3).unwrap().is_empty());
        assert!(matches!(enumerate_order_r(49, 3), Err(Error::Domain(_))));
        assert!(matches!(enumerate_order_r(7, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_fixtures_mod_seven() {
        let chars = enumerate_order_r(7, 3).unwrap();
        let chi = &chars[0]; // weight 1 relative to g = 3
        assert_eq!(chi.label(), vec![(7, 3, 1)]);
        assert_eq!(chi.eval(1), UnityValue::one(3));
        assert_eq!(chi.eval(2), UnityValue::root(3, 2)); // nu(2) = 2
        assert!(chi.eval(14).is_zero());
        assert_eq!(chi.eval(-5), chi.eval(2)); // -5 = 2 mod 7
        for chi in &chars {
            assert_eq!(chi.eval(1), UnityValue::one(3));
            assert_eq!(chi.eval(8), UnityValue::one(3)); // 8 = 1 mod 7
        }
    }

    #[test]
    fn periodicity_and_multiplicativity_exhaustive() {
        // Every enumerated character with modulus up to 500, all pairs.
        for r in [2u64, 3, 5, 7] {
            for q in (2..=500u64).filter(|&q| admissible_modulus(q, r)) {
                for chi in enumerate_order_r(q, r).unwrap() {
                    for n in 1..=q as i64 {
                        assert_eq!(chi.eval(n), chi.eval(n + q as i64));
                    }
                    for m in 1..=q as i64 {
                        let chi_m = chi.eval(m);
                        for n in 1..=q as i64 {
                            assert_eq!(chi.eval(m * n), chi_m.mul(chi.eval(n)), "q={q} r={r}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exact_order_and_orthogonality() {
        for (q, r) in [(7u64, 3u64), (13, 3), (91, 3), (11, 5), (31, 5), (29, 7)] {
            for chi in enumerate_order_r(q, r).unwrap() {
                // chi^j is principal iff r | j, checked pointwise on [1, q].
                for j in 1..r {
                    assert!(
                        (1..=q as i64).any(|n| {
                            let v = chi.eval(n).pow(j);
                            !v.is_zero() && v.exponent() != Some(0)
                        }),
                        "chi^{j} principal for q={q} r={r}"
                    );
                }
                assert!((1..=q as i64)
                    .all(|n| chi.eval(n).is_zero() || chi.eval(n).pow(r).exponent() == Some(0)));

                // Balanced value multiset: each exponent class appears
                // phi(q)/r times, so the character sum vanishes exactly.
                let mut counts = vec![0u64; r as usize];
                for n in 1..=q as i64 {
                    if let Some(e) = chi.eval(n).exponent() {
                        counts[e as usize] += 1;
                    }
                }
                assert!(counts.windows(2).all(|w| w[0] == w[1]), "q={q} r={r}");
            }
        }
    }

    #[test]
    fn gauss_sum_modulus() {
        for (q, r) in [(7u64, 3u64), (13, 3), (91, 3), (11, 5), (29, 7), (3, 2)] {
            for chi in enumerate_order_r(q, r).unwrap() {
                let tau = gauss_sum(&chi);
                assert!(
                    (tau.norm_sqr() - q as f64).abs() < 1e-9,
                    "|tau|^2 = {} for q={q} r={r}",
                    tau.norm_sqr()
                );
            }
        }
    }

    #[test]
    fn gauss_sum_principal_is_moebius() {
        assert!((gauss_sum_principal(1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for q in 1..=60u64 {
            if arith::is_squarefree(q) {
                let tau = gauss_sum_principal(q);
                assert!(
                    (tau - Complex64::new(arith::moebius(q) as f64, 0.0)).norm() < 1e-9,
                    "q = {q}"
                );
            }
        }
    }

    #[test]
    fn pv_ratio_small_fixtures() {
        // Only the quadratic character mod 3 is admissible: max partial
        // sum 1 against sqrt(3) log 3.
        let expected = 1.0 / (3f64.sqrt() * 3f64.ln());
        let got = pv_max_ratio_with_orders(3, &[2, 3, 5, 7]);
        assert!((got - expected).abs() < 1e-12, "got {got}");

        let cubic_mod_7 = pv_max_ratio_with_orders(7, &[3]);
        assert!(cubic_mod_7 > 0.0 && cubic_mod_7 <= 1.2);

        assert_eq!(pv_max_ratio_with_orders(6, &[3]), 0.0); // no admissible q
    }

    #[test]
    fn hull_diameter_matches_brute_force() {
        let chars = enumerate_order_r(13, 3).unwrap();
        for chi in &chars {
            let mut walk = vec![(0.0, 0.0)];
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 1..=26 {
                acc += chi.eval_complex(n);
                walk.push((acc.re, acc.im));
            }
            let mut brute = 0.0f64;
            for i in 0..walk.len() {
                for j in i + 1..walk.len() {
                    let d = ((walk[i].0 - walk[j].0).powi(2) + (walk[i].1 - walk[j].1).powi(2))
                        .sqrt();
                    brute = brute.max(d);
                }
            }
            assert!((point_set_diameter(&walk) - brute).abs() < 1e-12);
        }
    }
}
