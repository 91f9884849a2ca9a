//! `r`-th power residue symbols at split primes of `Z[zeta_r]`, and the
//! bijection with exact-order-`r` Dirichlet characters.
//!
//! A prime ideal above a split rational prime `p = 1 (mod r)` is pinned
//! down by the image `eta` of `zeta_r` in `Z[zeta_r] / P = F_p`; the
//! phi(r) primitive `r`-th roots of unity mod `p` enumerate the phi(r)
//! ideals above `p`. The symbol itself is evaluated through the Euler
//! criterion `m^((p-1)/r) = eta^j (mod p)`, which realises the Frobenius
//! definition exactly because the residue field is `F_p`.

use crate::arith::{self, ResidueSystem};
use crate::chars::{self, OrderRCharacter, UnityValue};
use crate::{Error, Result};

/// Symbol values share the representation of character values: an
/// exponent mod `r`, or the absorbing zero.
pub type SymbolValue = UnityValue;

/// A prime ideal of `Z[zeta_r]` above a split prime, as the pair `(p, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitPrimeSymbol {
    r: u64,
    p: u64,
    eta: u64,
}

impl SplitPrimeSymbol {
    pub fn new(p: u64, r: u64, eta: u64) -> Result<Self> {
        if !arith::is_prime(r) {
            return Err(Error::Domain(format!("order {r} must be prime")));
        }
        if !arith::is_prime(p) || p % r != 1 {
            return Err(Error::Domain(format!("{p} does not split in Q(zeta_{r})")));
        }
        if eta % p <= 1 || arith::pow_mod(eta, r, p) != 1 {
            return Err(Error::Domain(format!(
                "{eta} is not a primitive {r}-th root of unity mod {p}"
            )));
        }
        Ok(SplitPrimeSymbol { r, p, eta: eta % p })
    }

    pub fn order(&self) -> u64 {
        self.r
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn eta(&self) -> u64 {
        self.eta
    }
}

/// All primitive `r`-th roots of unity mod `p`, ascending: exactly phi(r)
/// of them when `p = 1 (mod r)`, none otherwise.
pub fn split_roots(p: u64, r: u64) -> Vec<u64> {
    if !arith::is_prime(p) || !arith::is_prime(r) || p % r != 1 {
        return Vec::new();
    }
    let g = arith::primitive_root(p).expect("p is prime");
    let base = arith::pow_mod(g, (p - 1) / r, p);
    let mut roots: Vec<u64> = (1..r).map(|j| arith::pow_mod(base, j, p)).collect();
    roots.sort_unstable();
    roots
}

/// The `r`-th power residue symbol `(m / P)` for `P = (p, eta)`: the zero
/// element when `p | m`, otherwise the exponent `j` with
/// `m^((p-1)/r) = eta^j (mod p)`.
pub fn residue_symbol(m: i64, s: &SplitPrimeSymbol) -> SymbolValue {
    let m = m.rem_euclid(s.p as i64) as u64;
    if m == 0 {
        return UnityValue::zero(s.r);
    }
    let t = arith::pow_mod(m, (s.p - 1) / s.r, s.p);
    let mut power = 1u64;
    for j in 0..s.r {
        if power == t {
            return UnityValue::root(s.r, j);
        }
        power = arith::mul_mod(power, s.eta, s.p);
    }
    unreachable!("m^((p-1)/r) is always an r-th root of unity mod p")
}

/// The unique exact-order-`r` Dirichlet character mod `p` agreeing with
/// `m -> residue_symbol(m, s)` at every `m in [1, p]`.
pub fn to_dirichlet(s: &SplitPrimeSymbol) -> Result<OrderRCharacter> {
    // nu(eta) determines the weight: the matching character must send the
    // generator g to eta's "inverse position", and a single pointwise
    // verification pass confirms it.
    let rs = ResidueSystem::new(s.p)?;
    let g_symbol = residue_symbol(rs.generator() as i64, s);
    let candidates = chars::enumerate_order_r(s.p, s.r)?;
    for chi in candidates {
        if chi.eval(rs.generator() as i64) != g_symbol {
            continue;
        }
        let agrees = (1..=s.p as i64).all(|m| chi.eval(m) == residue_symbol(m, s));
        if agrees {
            return Ok(chi);
        }
    }
    Err(Error::Correspondence(format!(
        "no exact-order-{} character mod {} matches eta = {}",
        s.r, s.p, s.eta
    )))
}

/// Product of residue symbols over pairwise-distinct split primes —
/// the symbol of squarefree conductor `prod p`. The empty product is the
/// trivial value.
pub fn product_symbol(m: i64, symbols: &[SplitPrimeSymbol]) -> SymbolValue {
    let Some(first) = symbols.first() else {
        return UnityValue::one(1);
    };
    let r = first.r;
    assert!(
        symbols.iter().all(|s| s.r == r),
        "symbols must share one order"
    );
    for (i, s) in symbols.iter().enumerate() {
        assert!(
            symbols[i + 1..].iter().all(|t| t.p != s.p),
            "split primes must be pairwise distinct"
        );
    }
    symbols
        .iter()
        .map(|s| residue_symbol(m, s))
        .fold(UnityValue::one(r), UnityValue::mul)
}
