//! Class numbers of imaginary quadratic orders and the weighted Kronecker
//! class number H(D).
//!
//! Class numbers are obtained by exhaustive enumeration of primitive
//! reduced binary quadratic forms, which is exact at the discriminant
//! sizes a Hasse-window census ever produces (|D| <= 4N).
//!
//! H(D) here is the paper-style weighted sum over conductors,
//! sum over f^2 | D with D/f^2 = 0,1 mod 4 of h(D/f^2)/w(D/f^2).
//! Note the division by the unit count w at *every* term; this differs
//! from the common Hurwitz-Kronecker normalization by a generic factor
//! of 1/2, and is the right weight when curve classes are counted with
//! mass 1/#Aut(E).

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::arith::{isqrt, kronecker, rat, Rational};
use num_traits::Zero;

/// A negative discriminant: d <= -3 and d = 0 or 1 (mod 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant(i64);

impl Discriminant {
    pub fn new(d: i64) -> Self {
        assert!(d <= -3, "discriminant must be <= -3, got {d}");
        assert!(
            d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1,
            "discriminant must be 0 or 1 mod 4, got {d}"
        );
        Discriminant(d)
    }

    pub fn value(self) -> i64 {
        self.0
    }
}

/// Class number and unit count of an imaginary quadratic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassData {
    pub h: u64,
    pub w: u32,
}

/// Primitive reduced forms (a, b, c) of discriminant d:
/// b^2 - 4ac = d, |b| <= a <= c, gcd(a,b,c) = 1, and b >= 0 whenever
/// |b| = a or a = c.
pub fn reduced_forms(d: Discriminant) -> Vec<(i64, i64, i64)> {
    let dv = d.value();
    let mut forms = Vec::new();
    let a_max = isqrt((-dv) as u64 / 3) as i64;
    for a in 1..=a_max {
        for b in -a..=a {
            let num = b * b - dv;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if b < 0 && (-b == a || a == c) {
                continue;
            }
            let g = crate::arith::gcd(a as u64, crate::arith::gcd(b.unsigned_abs(), c as u64));
            if g != 1 {
                continue;
            }
            forms.push((a, b, c));
        }
    }
    forms
}

/// h(d) by reduced-form enumeration, together with w(d).
pub fn class_data(d: Discriminant) -> ClassData {
    let h = reduced_forms(d).len() as u64;
    let w = match d.value() {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    ClassData { h, w }
}

/// The weighted Kronecker class number H(D) = sum h(D/f^2)/w(D/f^2).
pub fn kronecker_class_number(dd: i64) -> Rational {
    assert!(dd <= -3, "H(D) requires D <= -3, got {dd}");
    assert!(
        dd.rem_euclid(4) == 0 || dd.rem_euclid(4) == 1,
        "H(D) requires D = 0,1 mod 4, got {dd}"
    );
    let mut sum = Rational::zero();
    let mut f = 1i64;
    while f * f <= -dd {
        if dd % (f * f) == 0 {
            let d0 = dd / (f * f);
            let r = d0.rem_euclid(4);
            if r == 0 || r == 1 {
                let cd = class_data(Discriminant::new(d0));
                sum += rat(cd.h as i64, cd.w as i64);
            }
        }
        f += 1;
    }
    sum
}

/// Memo table for (h, w, H) keyed by discriminant; content-addressed, so
/// it is safe to share read-only between census sweeps.
#[derive(Debug, Default)]
pub struct ClassNumberCache {
    h_kron: HashMap<i64, Rational>,
}

impl ClassNumberCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kronecker_class_number(&mut self, dd: i64) -> Rational {
        if let Some(v) = self.h_kron.get(&dd) {
            return v.clone();
        }
        let v = kronecker_class_number(dd);
        self.h_kron.insert(dd, v.clone());
        v
    }
}

/// Truncated Dirichlet series sum_{n<=U} (d/n)/n in double precision.
pub fn dirichlet_l1(d: Discriminant, u: u64) -> f64 {
    assert!(u >= 1);
    let dv = d.value();
    let period = (-dv) as u64;
    // chi_d has period |d| for d = 0,1 mod 4
    let table: Vec<i8> = (0..period)
        .map(|r| kronecker(dv, r as i64) as i8)
        .collect();
    let mut sum = 0.0f64;
    let mut r = 1usize;
    for n in 1..=u {
        sum += table[r] as f64 / n as f64;
        r += 1;
        if r as u64 == period {
            r = 0;
        }
    }
    sum
}

/// |2*pi*h/(w*sqrt(|d|)) - L(1,chi_d; U)|: class number formula residual.
pub fn class_number_formula_residual(d: Discriminant, u: u64) -> f64 {
    assert!(u >= 1000);
    let cd = class_data(d);
    let exact = 2.0 * PI * cd.h as f64 / (cd.w as f64 * ((-d.value()) as f64).sqrt());
    (exact - dirichlet_l1(d, u)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;

    #[test]
    fn class_data_small() {
        assert_eq!(class_data(Discriminant::new(-3)), ClassData { h: 1, w: 6 });
        assert_eq!(class_data(Discriminant::new(-4)), ClassData { h: 1, w: 4 });
        assert_eq!(class_data(Discriminant::new(-15)), ClassData { h: 2, w: 2 });
        assert_eq!(reduced_forms(Discriminant::new(-15)), vec![(1, 1, 4), (2, 1, 2)]);
        assert_eq!(class_data(Discriminant::new(-23)).h, 3);
        assert_eq!(class_data(Discriminant::new(-47)).h, 5);
    }

    #[test]
    #[should_panic]
    fn rejects_positive() {
        Discriminant::new(5);
    }

    #[test]
    #[should_panic]
    fn rejects_two_mod_four() {
        Discriminant::new(-6);
    }

    #[test]
    fn kronecker_class_numbers() {
        assert_eq!(kronecker_class_number(-3), rat(1, 6));
        assert_eq!(kronecker_class_number(-12), rat(2, 3));
        assert_eq!(kronecker_class_number(-19), rat(1, 2));
        assert_eq!(kronecker_class_number(-27), rat(2, 3));
    }

    #[test]
    fn h_denominator_divides_twelve() {
        for dv in (-2000..=-3i64).filter(|d| d.rem_euclid(4) <= 1) {
            let h = kronecker_class_number(dv);
            assert!((h * rat_int(12)).is_integer(), "12*H({dv}) not integral");
        }
    }

    #[test]
    fn reduced_forms_valid_and_distinct() {
        for dv in (-3000..=-3i64).filter(|d| d.rem_euclid(4) <= 1) {
            let d = Discriminant::new(dv);
            let forms = reduced_forms(d);
            for &(a, b, c) in &forms {
                assert_eq!(b * b - 4 * a * c, dv);
                assert!(b.abs() <= a && a <= c);
                if b.abs() == a || a == c {
                    assert!(b >= 0);
                }
            }
            let mut sorted = forms.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), forms.len());
        }
    }

    /// Independent oracle: enumerate forms in the opposite order (b outer,
    /// a | (b^2 - d)/4 inner) and compare counts.
    #[test]
    fn class_number_second_enumeration_order() {
        for dv in (-4000..=-3i64).filter(|d| d.rem_euclid(4) <= 1) {
            let mut count = 0u64;
            let b_max = isqrt((-dv) as u64 / 3) as i64;
            for b in -b_max..=b_max {
                let num = b * b - dv;
                if num % 4 != 0 {
                    continue;
                }
                let ac = num / 4;
                let mut a = b.abs().max(1);
                while a * a <= ac {
                    if a != 0 && ac % a == 0 {
                        let c = ac / a;
                        let reduced = b.abs() <= a && a <= c && !(b < 0 && (-b == a || a == c));
                        let g = crate::arith::gcd(
                            a as u64,
                            crate::arith::gcd(b.unsigned_abs(), c as u64),
                        );
                        if reduced && g == 1 {
                            count += 1;
                        }
                    }
                    a += 1;
                }
            }
            assert_eq!(count, class_data(Discriminant::new(dv)).h, "h({dv})");
        }
    }

    #[test]
    fn dirichlet_l1_values() {
        assert_eq!(dirichlet_l1(Discriminant::new(-4), 1), 1.0);
        let u = 200_000;
        let leibniz = dirichlet_l1(Discriminant::new(-4), u);
        assert!((leibniz - PI / 4.0).abs() < 10.0 / u as f64);
        let l3 = dirichlet_l1(Discriminant::new(-3), u);
        assert!((l3 - PI / (3.0 * 3.0f64.sqrt())).abs() < 10.0 / u as f64);
    }

    #[test]
    fn class_number_formula_spot() {
        assert!(class_number_formula_residual(Discriminant::new(-3), 1_000_000) < 1e-4);
        assert!(class_number_formula_residual(Discriminant::new(-4), 1_000_000) < 1e-4);
        assert!(class_number_formula_residual(Discriminant::new(-9995), 1_000_000) < 1e-3);
    }
}
