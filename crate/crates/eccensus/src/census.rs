//! Hasse-window censuses: for each group order N the primes p with
//! (sqrt N - 1)^2 < p < (sqrt N + 1)^2 are the only fields where a curve
//! of order N can live, and summing the per-prime weighted counts over
//! that window gives the global M(G) and M(N;m).  This module also
//! verifies the two structural identities that make the class-number
//! route work — the Schoof count M_p(N;m) = H(D_N(p)/m^2) and the
//! Moebius sieve relating M(G) to the M(N; kN1) — plus the
//! prime-distribution diagnostics (theta sums, variance sums, root
//! counts of the shifted discriminant polynomial).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use num_traits::Zero;
use rayon::prelude::*;

use crate::arith::{
    factorize, gcd, moebius, primes_in_interval, rat_int, Rational,
};
use crate::curves::{sweep_prime, GroupShape, PrimeSweep};
use crate::quadforms::kronecker_class_number;

/// The open interval (sqrt N - 1)^2 < p < (sqrt N + 1)^2.  Membership is
/// decided by the integer predicate (p + 1 - N)^2 < 4p; the f64 bounds
/// below are only used to bracket the sieve range.
#[derive(Debug, Clone, Copy)]
pub struct HasseWindow {
    pub n: u64,
}

impl HasseWindow {
    pub fn new(n: u64) -> Self {
        assert!(n >= 1);
        HasseWindow { n }
    }

    #[inline]
    pub fn contains(&self, p: u64) -> bool {
        let d = p as i128 + 1 - self.n as i128;
        d * d < 4 * p as i128
    }

    /// Window primes in increasing order.  The sieve range is padded and
    /// then filtered through the exact predicate.
    pub fn primes(&self) -> Vec<u64> {
        let n = self.n;
        let s = crate::arith::isqrt(n);
        // (sqrt N - 1)^2 >= (s - 1)^2 - anything; pad generously.
        let lo = (s.saturating_sub(2)).pow(2);
        let hi = (s + 3).pow(2);
        primes_in_interval(lo.saturating_sub(1), hi)
            .into_iter()
            .filter(|&p| self.contains(p))
            .collect()
    }

    /// Window primes > 3; logs a warning if any were dropped.
    pub fn usable_primes(&self) -> Vec<u64> {
        let all = self.primes();
        let (small, big): (Vec<u64>, Vec<u64>) = all.into_iter().partition(|&p| p <= 3);
        if !small.is_empty() {
            log::warn!(
                "window of N={} contains primes {:?} <= 3; excluded from census",
                self.n,
                small
            );
        }
        big
    }
}

/// D_N(p) = (p + 1 - N)^2 - 4p.
pub fn discriminant_poly(n: u64, p: u64) -> i64 {
    let d = p as i128 + 1 - n as i128;
    (d * d - 4 * p as i128) as i64
}

/// d_{N,f}(p) = D_N(p) / f^2; rejects f^2 not dividing D.
pub fn d_reduced(n: u64, p: u64, f: u64) -> i64 {
    let d = discriminant_poly(n, p);
    let f2 = (f * f) as i64;
    assert_eq!(d % f2, 0, "f^2 = {f2} does not divide D_{n}({p}) = {d}");
    d / f2
}

/// One prime's worth of identity verification.
#[derive(Debug, Clone)]
pub struct CensusRecord {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
    pub m: u64,
    pub p: Option<u64>,
    pub weighted_count: Rational,
    pub class_number_value: Rational,
    pub matches: bool,
}

impl CensusRecord {
    fn new(n: u64, n1: u64, n2: u64, m: u64, p: Option<u64>, wc: Rational, cn: Rational) -> Self {
        let matches = wc == cn;
        CensusRecord {
            n,
            n1,
            n2,
            m,
            p,
            weighted_count: wc,
            class_number_value: cn,
            matches,
        }
    }
}

const SWEEP_SCHEMA: &str = "eccensus-sweep-v1";

/// Disk- and memory-backed store of per-prime sweeps.  On-disk records
/// are one CSV file per prime with a schema header; writes go through a
/// tempfile + atomic rename so concurrent readers never see a torn file.
pub struct SweepCache {
    dir: Option<PathBuf>,
    mem: Mutex<BTreeMap<u64, std::sync::Arc<PrimeSweep>>>,
}

impl SweepCache {
    pub fn new(dir: Option<&Path>) -> Self {
        if let Some(d) = dir {
            if let Err(e) = fs::create_dir_all(d) {
                log::warn!("cannot create cache dir {}: {e}; disk cache disabled", d.display());
                return SweepCache { dir: None, mem: Mutex::new(BTreeMap::new()) };
            }
        }
        SweepCache {
            dir: dir.map(|d| d.to_path_buf()),
            mem: Mutex::new(BTreeMap::new()),
        }
    }

    /// In-memory only.
    pub fn ephemeral() -> Self {
        SweepCache::new(None)
    }

    /// Resolves the cache directory from a CLI flag and the
    /// `ECCENSUS_CACHE` environment variable, defaulting to
    /// `./census-cache`.
    pub fn from_cli(flag: Option<&Path>) -> Self {
        let dir = flag
            .map(|p| p.to_path_buf())
            .or_else(|| std::env::var_os("ECCENSUS_CACHE").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("./census-cache"));
        SweepCache::new(Some(&dir))
    }

    fn file_for(&self, p: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("sweep-p{p}.csv")))
    }

    fn load_disk(&self, p: u64) -> Option<PrimeSweep> {
        let path = self.file_for(p)?;
        let text = fs::read_to_string(&path).ok()?;
        let mut lines = text.lines();
        let header = lines.next()?;
        if header != format!("schema,{SWEEP_SCHEMA}") {
            log::warn!("cache file {} has unknown schema; ignoring", path.display());
            return None;
        }
        let cols = lines.next()?;
        if cols != "p,n1,n2,count" {
            return None;
        }
        let mut counts = BTreeMap::new();
        for line in lines {
            let mut it = line.split(',');
            let pp: u64 = it.next()?.parse().ok()?;
            let n1: u64 = it.next()?.parse().ok()?;
            let n2: u64 = it.next()?.parse().ok()?;
            let c: u64 = it.next()?.parse().ok()?;
            if pp != p {
                return None;
            }
            counts.insert((n1, n2), c);
        }
        let sweep = PrimeSweep { p, counts };
        // Sanity check before trusting disk contents.
        if sweep.total_models() != p * p - p {
            log::warn!("cache file {} fails mass check; ignoring", path.display());
            return None;
        }
        Some(sweep)
    }

    fn store_disk(&self, sweep: &PrimeSweep) {
        let Some(path) = self.file_for(sweep.p) else { return };
        let dir = self.dir.as_ref().unwrap();
        let write = || -> std::io::Result<()> {
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            writeln!(tmp, "schema,{SWEEP_SCHEMA}")?;
            writeln!(tmp, "p,n1,n2,count")?;
            for (&(n1, n2), &c) in &sweep.counts {
                writeln!(tmp, "{},{},{},{}", sweep.p, n1, n2, c)?;
            }
            tmp.persist(&path)?;
            Ok(())
        };
        if let Err(e) = write() {
            log::warn!("cannot write cache file {}: {e}", path.display());
        }
    }

    pub fn get(&self, p: u64) -> std::sync::Arc<PrimeSweep> {
        if let Some(s) = self.mem.lock().unwrap().get(&p) {
            return std::sync::Arc::clone(s);
        }
        let sweep = match self.load_disk(p) {
            Some(s) => s,
            None => {
                let s = sweep_prime(p);
                self.store_disk(&s);
                s
            }
        };
        let arc = std::sync::Arc::new(sweep);
        self.mem
            .lock()
            .unwrap()
            .entry(p)
            .or_insert_with(|| std::sync::Arc::clone(&arc));
        arc
    }

    /// Sweeps many primes, each at most once, using prime-level
    /// parallelism for the ones not yet cached.
    pub fn warm(&self, primes: &[u64]) {
        let missing: Vec<u64> = {
            let mem = self.mem.lock().unwrap();
            primes.iter().copied().filter(|p| !mem.contains_key(p)).collect()
        };
        let loaded: Vec<(u64, PrimeSweep)> = missing
            .par_iter()
            .map(|&p| {
                let s = self.load_disk(p).unwrap_or_else(|| {
                    let s = sweep_prime(p);
                    self.store_disk(&s);
                    s
                });
                (p, s)
            })
            .collect();
        let mut mem = self.mem.lock().unwrap();
        for (p, s) in loaded {
            mem.entry(p).or_insert_with(|| std::sync::Arc::new(s));
        }
    }
}

/// Verifies M_p(N;m) = H(D_N(p)/m^2) when m | p-1 (and = 0 otherwise)
/// at every usable window prime, by independent brute sweep and class
/// number computation.
pub fn schoof_identity_check(cache: &SweepCache, n: u64, m: u64) -> Vec<CensusRecord> {
    assert!(n % 2 == 1 && n >= 5, "need odd N >= 5");
    assert!(m % 2 == 1 && n % (m * m) == 0, "need odd m with m^2 | N");
    let primes = HasseWindow::new(n).usable_primes();
    cache.warm(&primes);
    primes
        .into_iter()
        .map(|p| {
            let wc = cache.get(p).weighted_count_torsion(n, m);
            let cn = if (p - 1) % m == 0 {
                kronecker_class_number(d_reduced(n, p, m))
            } else {
                Rational::zero()
            };
            CensusRecord::new(n, 0, 0, m, Some(p), wc, cn)
        })
        .collect()
}

/// M(G) = sum over window primes of M_p(G), by curve sweeps.
pub fn global_census_m_of_g(cache: &SweepCache, g: GroupShape) -> Rational {
    assert!(g.order() % 2 == 1, "census restricted to odd group order");
    let primes = HasseWindow::new(g.order()).usable_primes();
    cache.warm(&primes);
    primes
        .into_iter()
        .map(|p| cache.get(p).weighted_count_group(g))
        .fold(Rational::zero(), |a, b| a + b)
}

/// M(N;m) = sum over window primes p = 1 mod m of H(D_N(p)/m^2), the
/// class-number route: no curve sweeps at all.
pub fn global_census_m_of_n_m(n: u64, m: u64) -> Rational {
    assert!(n % 2 == 1 && m % 2 == 1 && n % (m * m) == 0);
    HasseWindow::new(n)
        .usable_primes()
        .into_iter()
        .filter(|&p| (p - 1) % m == 0)
        .map(|p| kronecker_class_number(d_reduced(n, p, m)))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Report from comparing the sweep census against the Moebius sieve over
/// the class-number censuses.
#[derive(Debug, Clone)]
pub struct SieveReport {
    pub g: GroupShape,
    pub sweep_value: Rational,
    pub sieve_value: Rational,
    pub terms: Vec<(u64, i32, Rational)>, // (k, mu(k), M(N; kN1))
    pub matches: bool,
}

/// M(G) = sum_{k^2 | N2} mu(k) M(N1^2 N2; k N1), both sides exact.
pub fn inclusion_exclusion_check(cache: &SweepCache, g: GroupShape) -> SieveReport {
    assert!(g.order() % 2 == 1);
    let n = g.order();
    let sweep_value = global_census_m_of_g(cache, g);
    let mut terms = Vec::new();
    let mut sieve_value = Rational::zero();
    for k in factorize(g.n2()).divisors() {
        if g.n2() % (k * k) != 0 {
            continue;
        }
        let mu = moebius(k);
        if mu == 0 {
            continue;
        }
        let t = global_census_m_of_n_m(n, k * g.n1());
        sieve_value += rat_int(mu as i64) * &t;
        terms.push((k, mu, t));
    }
    let matches = sweep_value == sieve_value;
    SieveReport { g, sweep_value, sieve_value, terms, matches }
}

/// theta(X,Y;q,a) = sum of log p over primes in (X, X+Y] with p = a mod
/// q, and the discrepancy E = theta - Y/phi(q) (E unadjusted when
/// gcd(a,q) > 1, where theta is almost always 0).
pub fn theta_and_discrepancy(x: u64, y: u64, q: u64, a: u64) -> (f64, f64) {
    assert!(y >= 1 && y <= x && q >= 1);
    let theta: f64 = primes_in_interval(x, x + y + 1)
        .into_iter()
        .filter(|&p| p <= x + y && p % q == a % q)
        .map(|p| (p as f64).ln())
        .sum();
    let e = if gcd(a, q) == 1 || q == 1 {
        theta - y as f64 / crate::arith::euler_phi(q) as f64
    } else {
        theta
    };
    (theta, e)
}

/// sum_{q <= Q} sum_{(a,q)=1} E(X,Y;q,a)^2, with the comparison scale
/// Y*Q*log X returned alongside.
pub fn bdh_variance_sum(x: u64, y: u64, q_max: u64) -> (f64, f64) {
    assert!(q_max >= 1 && q_max <= y && y <= x);
    let total: f64 = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            (0..q)
                .filter(|&a| gcd(a, q) == 1)
                .map(|a| theta_and_discrepancy(x, y, q, a).1.powi(2))
                .sum::<f64>()
        })
        .sum();
    let scale = y as f64 * q_max as f64 * (x as f64).ln();
    (total, scale)
}

/// #{l mod v : (l - N/u)^2 - 4N/u^2 = 0 mod v}, computed by CRT over the
/// prime powers of v (roots counted per prime power by direct scan).
pub fn delta_root_count(n: u64, u: u64, v: u64) -> u64 {
    assert!(n % (u * u) == 0, "need u^2 | N");
    assert!(v >= 1);
    let nu = (n / u) as i128;
    let nu2 = (n / (u * u)) as i128;
    let mut count = 1u64;
    for &(q, e) in &factorize(v).factors {
        let pe = q.pow(e) as i128;
        let local = (0..pe)
            .filter(|&l| ((l - nu) * (l - nu) - 4 * nu2).rem_euclid(pe) == 0)
            .count() as u64;
        count *= local;
    }
    count
}

/// Diagnostic row for the growth-rate comparison M(G) vs
/// K(G) (#G)^2 / (#Aut(G) log #G).
#[derive(Debug, Clone)]
pub struct MainTermReport {
    pub g: GroupShape,
    pub census: f64,
    pub predicted: f64,
    pub ratio: f64,
}

pub fn main_theorem_report(
    cache: &SweepCache,
    g: GroupShape,
    kg: f64,
    aut_order: f64,
) -> MainTermReport {
    assert!(g.order() > 1, "trivial group excluded");
    let census = crate::arith::rational_to_f64(&global_census_m_of_g(cache, g));
    let n = g.order() as f64;
    let predicted = kg * n * n / (aut_order * n.ln());
    MainTermReport { g, census, predicted, ratio: census / predicted }
}
