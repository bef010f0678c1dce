//! Brute-force elliptic curve arithmetic over F_p: group orders via
//! character sums, group shapes via point-order lcms, and the
//! automorphism-weighted model counts M_p(G).
//!
//! Weighting uses the mass identity: for p > 3 every F_p-isomorphism
//! class of curves has exactly (p-1)/#Aut(E) short Weierstrass models,
//! so dividing raw (a,b) model counts by p-1 yields sums of 1/#Aut(E)
//! without any j = 0, 1728 case analysis.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{
    factorize, is_prime, kronecker, lcm, rat_i128, Factorization, Rational,
};

/// y^2 = x^3 + ax + b over F_p with p prime > 3 and nonzero discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeFieldCurve {
    p: u64,
    a: u64,
    b: u64,
}

impl PrimeFieldCurve {
    pub fn new(p: u64, a: u64, b: u64) -> Self {
        assert!(p > 3 && is_prime(p), "p must be a prime > 3, got {p}");
        let a = a % p;
        let b = b % p;
        let disc = (4 * mulmod(a, mulmod(a, a, p), p) + 27 * mulmod(b, b, p)) % p;
        assert!(disc != 0, "singular curve: 4a^3 + 27b^2 = 0 mod {p}");
        PrimeFieldCurve { p, a, b }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn a(&self) -> u64 {
        self.a
    }
    pub fn b(&self) -> u64 {
        self.b
    }
}

/// The shape (N1, N2) of a group Z/N1 x Z/N1N2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupShape {
    n1: u64,
    n2: u64,
}

impl GroupShape {
    pub fn new(n1: u64, n2: u64) -> Self {
        assert!(n1 >= 1 && n2 >= 1);
        GroupShape { n1, n2 }
    }

    /// Parses the CLI form `AxB` meaning Z/A x Z/B with A | B.
    pub fn from_cyclic_pair(a: u64, b: u64) -> Self {
        assert!(a >= 1 && b >= 1 && b % a == 0, "need A | B in Z/A x Z/B");
        GroupShape { n1: a, n2: b / a }
    }

    pub fn cyclic(n: u64) -> Self {
        GroupShape::new(1, n)
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }
    pub fn n2(&self) -> u64 {
        self.n2
    }
    pub fn order(&self) -> u64 {
        self.n1 * self.n1 * self.n2
    }
    pub fn exponent(&self) -> u64 {
        self.n1 * self.n2
    }
}

impl std::fmt::Display for GroupShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n1, self.n1 * self.n2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvePoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

const NO_ROOT: u64 = u64::MAX;

/// Per-prime lookup tables: quadratic character, square roots, inverses
/// and cubes, all indexed by residue.
pub struct FieldTables {
    pub p: u64,
    pub chi: Vec<i8>,
    pub sqrt: Vec<u64>,
    pub inv: Vec<u64>,
    pub cubes: Vec<u64>,
}

impl FieldTables {
    pub fn new(p: u64) -> Self {
        assert!(p > 3 && is_prime(p));
        let n = p as usize;
        let mut chi = vec![-1i8; n];
        chi[0] = 0;
        let mut sqrt = vec![NO_ROOT; n];
        for y in 0..p {
            let c = mulmod(y, y, p) as usize;
            if sqrt[c] == NO_ROOT {
                sqrt[c] = y;
            }
            if c != 0 {
                chi[c] = 1;
            }
        }
        let mut inv = vec![0u64; n];
        inv[1] = 1;
        for i in 2..p {
            inv[i as usize] = p - mulmod(p / i, inv[(p % i) as usize], p);
        }
        let cubes = (0..p).map(|x| mulmod(x, mulmod(x, x, p), p)).collect();
        FieldTables { p, chi, sqrt, inv, cubes }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
}

fn ec_add(t: &FieldTables, a_coef: u64, p1: CurvePoint, p2: CurvePoint) -> CurvePoint {
    let p = t.p;
    let (x1, y1) = match p1 {
        CurvePoint::Infinity => return p2,
        CurvePoint::Affine { x, y } => (x, y),
    };
    let (x2, y2) = match p2 {
        CurvePoint::Infinity => return p1,
        CurvePoint::Affine { x, y } => (x, y),
    };
    let slope = if x1 == x2 {
        if y1 != y2 || y1 == 0 {
            return CurvePoint::Infinity;
        }
        // tangent: (3x^2 + a) / 2y
        let num = t.add(mulmod(3, mulmod(x1, x1, p), p), a_coef);
        mulmod(num, t.inv[t.add(y1, y1) as usize], p)
    } else {
        mulmod(t.sub(y2, y1), t.inv[t.sub(x2, x1) as usize], p)
    };
    let x3 = t.sub(t.sub(mulmod(slope, slope, p), x1), x2);
    let y3 = t.sub(mulmod(slope, t.sub(x1, x3), p), y1);
    CurvePoint::Affine { x: x3, y: y3 }
}

fn ec_mul(t: &FieldTables, a_coef: u64, mut k: u64, pt: CurvePoint) -> CurvePoint {
    let mut acc = CurvePoint::Infinity;
    let mut base = pt;
    while k > 0 {
        if k & 1 == 1 {
            acc = ec_add(t, a_coef, acc, base);
        }
        base = ec_add(t, a_coef, base, base);
        k >>= 1;
    }
    acc
}

/// Order of a point, given the factored group order.
fn point_order(t: &FieldTables, a_coef: u64, pt: CurvePoint, group_order: &Factorization) -> u64 {
    let mut ord = group_order.value();
    for &(q, _) in &group_order.factors {
        while ord % q == 0 && ec_mul(t, a_coef, ord / q, pt) == CurvePoint::Infinity {
            ord /= q;
        }
    }
    ord
}

/// #E(F_p) = p + 1 + sum_x chi(x^3 + ax + b).
pub fn curve_order(c: &PrimeFieldCurve) -> u64 {
    let p = c.p;
    let mut sum = 0i64;
    for x in 0..p {
        let rhs = (mulmod(x, mulmod(x, x, p), p) + mulmod(c.a, x, p) + c.b) % p;
        sum += kronecker(rhs as i64, p as i64) as i64;
    }
    (p as i64 + 1 + sum) as u64
}

/// Precomputed data for one possible order N in the Hasse window of p:
/// the factorization of N and the exponents N/N1 admissible under the
/// Weil pairing constraint N1 | p - 1 (sorted ascending).
struct OrderInfo {
    factors: Factorization,
    exponents: Vec<u64>,
}

fn order_info(n: u64, p: u64) -> OrderInfo {
    let factors = factorize(n);
    let mut exponents: Vec<u64> = factors
        .divisors()
        .into_iter()
        .filter(|&d| n % (d * d) == 0 && (p - 1) % d == 0)
        .map(|d| n / d)
        .collect();
    exponents.sort_unstable();
    OrderInfo { factors, exponents }
}

/// Exponent-driven shape computation for a single curve whose order is
/// already known.  Iterates points in deterministic (x, then smaller y)
/// order and stops as soon as the running lcm of point orders pins down
/// a unique admissible exponent.
fn shape_from_tables(
    t: &FieldTables,
    a: u64,
    b: u64,
    n: u64,
    info: &OrderInfo,
) -> GroupShape {
    debug_assert_eq!(info.factors.value(), n);
    let final_shape = |e: u64| {
        let n1 = n / e;
        GroupShape::new(n1, e / n1)
    };
    if info.exponents.len() == 1 {
        return final_shape(info.exponents[0]);
    }
    let mut e = 1u64;
    for x in 0..t.p {
        let rhs = (t.cubes[x as usize] + mulmod(a, x, t.p) + b) % t.p;
        let y = t.sqrt[rhs as usize];
        if y == NO_ROOT {
            continue;
        }
        let pt = CurvePoint::Affine { x, y };
        let ord = point_order(t, a, pt, &info.factors);
        e = lcm(e, ord);
        let mut viable = info.exponents.iter().filter(|&&cand| cand % e == 0);
        let first = *viable.next().expect("running lcm must divide an admissible exponent");
        if viable.next().is_none() {
            return final_shape(first);
        }
    }
    // Every point order seen; the lcm is the exponent.
    final_shape(e)
}

/// The group shape of E(F_p) = Z/N1 x Z/N1N2.
pub fn group_shape(c: &PrimeFieldCurve) -> GroupShape {
    let t = FieldTables::new(c.p);
    let n = curve_order(c);
    let info = order_info(n, c.p);
    shape_from_tables(&t, c.a, c.b, n, &info)
}

/// Result of sweeping every nonsingular (a, b) model over F_p: raw model
/// counts per group shape.  Dividing by p - 1 converts to weighted
/// isomorphism-class counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSweep {
    pub p: u64,
    pub counts: BTreeMap<(u64, u64), u64>,
}

impl PrimeSweep {
    /// M_p(G): weighted number of classes with group exactly G.
    pub fn weighted_count_group(&self, g: GroupShape) -> Rational {
        let c = *self.counts.get(&(g.n1, g.n2)).unwrap_or(&0);
        rat_i128(c as i128, (self.p - 1) as i128)
    }

    /// M_p(N; m): weighted count of classes with order N and full
    /// rational m-torsion, i.e. shape (N1, N2) with m | N1.
    pub fn weighted_count_torsion(&self, n: u64, m: u64) -> Rational {
        assert!(m >= 1 && n % (m * m) == 0, "need m^2 | N");
        let c: u64 = self
            .counts
            .iter()
            .filter(|&(&(n1, n2), _)| n1 * n1 * n2 == n && n1 % m == 0)
            .map(|(_, &cnt)| cnt)
            .sum();
        rat_i128(c as i128, (self.p - 1) as i128)
    }

    /// Total number of nonsingular models, sum over all shapes.
    pub fn total_models(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Sweeps all p^2 - p nonsingular models over F_p, classifying each by
/// group shape.  Parallelizes over the a-coefficient.
pub fn sweep_prime(p: u64) -> PrimeSweep {
    assert!(p > 3 && is_prime(p), "sweep requires a prime > 3, got {p}");
    let t = Arc::new(FieldTables::new(p));
    // Possible orders fill the closed Hasse range [p+1-floor(2 sqrt p), ...+].
    let width = crate::arith::isqrt(4 * p);
    let infos: HashMap<u64, OrderInfo> = ((p + 1 - width)..=(p + 1 + width))
        .map(|n| (n, order_info(n, p)))
        .collect();
    let infos = Arc::new(infos);

    let counts = (0..p)
        .into_par_iter()
        .map(|a| {
            let t = Arc::clone(&t);
            let infos = Arc::clone(&infos);
            let mut local: BTreeMap<(u64, u64), u64> = BTreeMap::new();
            // rhs base for this a: x^3 + a x
            let base: Vec<u64> = (0..p)
                .map(|x| (t.cubes[x as usize] + mulmod(a, x, p)) % p)
                .collect();
            let four_a3 = mulmod(4, t.cubes[a as usize], p);
            for b in 0..p {
                let disc = (four_a3 + mulmod(27, mulmod(b, b, p), p)) % p;
                if disc == 0 {
                    continue;
                }
                let mut sum = 0i64;
                for &r in &base {
                    let idx = r + b;
                    let idx = if idx >= p { idx - p } else { idx };
                    sum += t.chi[idx as usize] as i64;
                }
                let n = (p as i64 + 1 + sum) as u64;
                let info = &infos[&n];
                let shape = shape_from_tables(&t, a, b, n, info);
                *local.entry((shape.n1(), shape.n2())).or_insert(0) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut acc, local| {
            for (k, v) in local {
                *acc.entry(k).or_insert(0) += v;
            }
            acc
        });

    PrimeSweep { p, counts }
}

/// M_p(G) by a fresh sweep.  Census code should prefer a cached
/// [`PrimeSweep`].
pub fn weighted_count_with_group(p: u64, g: GroupShape) -> Rational {
    sweep_prime(p).weighted_count_group(g)
}

/// M_p(N; m) by a fresh sweep.
pub fn weighted_count_with_torsion(p: u64, n: u64, m: u64) -> Rational {
    sweep_prime(p).weighted_count_torsion(n, m)
}
