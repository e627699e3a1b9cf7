//! Library routines against the brute-force oracles in `common`.

mod common;

use common::*;
use num::BigRational;
use proptest::prelude::*;
use sparselab::gridfn::{weak_norm, GridFunction, MeasureSpec, NormConvention};
use sparselab::lattice::Resolution;
use sparselab::real::{Rat64, Real};

fn ok(r: Result<u64, String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn a1_constant_matches_oracle() {
    ok(a1_matches(101));
}

#[test]
fn aprs_constant_matches_oracle() {
    ok(aprs_matches(102));
}

#[test]
fn exact_fw_constant_matches_oracle() {
    ok(fw_matches(103));
}

#[test]
fn exact_maximal_matches_oracle() {
    ok(maximal_matches(104));
}

#[test]
fn sparse_operator_matches_oracle() {
    ok(sparse_operator_matches(105));
}

#[test]
fn bilinear_form_matches_oracle() {
    ok(bilinear_matches(106));
}

/// `sup_λ λ μ({f > λ})^{1/p}` over every value of `f`, approached from below.
fn weak_norm_oracle(f: &[i128], p: i64) -> f64 {
    let n = f.len() as f64;
    f.iter()
        .filter(|&&v| v > 0)
        .map(|&lam| {
            let count = f.iter().filter(|&&v| v >= lam).count() as f64;
            lam as f64 * (count / n).powf(1.0 / p as f64)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_norm_is_attained_at_a_value(vals in prop::collection::vec(0i128..50, 48), p in 1i64..4) {
        let res = Resolution::new(4).unwrap();
        let f = GridFunction::from_integers(res, vals.clone(), 1).unwrap();
        let got = weak_norm(&f, Rat64::from_integer(p), MeasureSpec::Lebesgue, NormConvention::Measure, None).unwrap();
        let want = weak_norm_oracle(&vals, p);
        prop_assert!(rel_close(got.to_f64(), want, 1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn exact_maximal_dominates_every_average(vals in prop::collection::vec(0i128..100, 24), a in 0usize..24, len in 1usize..24) {
        let res = Resolution::new(3).unwrap();
        let f = GridFunction::from_integers(res, vals.clone(), 1).unwrap();
        let m = sparselab::maximal::maximal(&f, sparselab::maximal::MaximalMode::exact()).unwrap();
        let b = (a + len).min(24);
        let avg = rat(vals[a..b].iter().sum(), (b - a) as i128);
        for x in a..b {
            prop_assert!(exact(&m.value(x)) >= avg);
        }
    }

    #[test]
    fn exact_arithmetic_round_trips(num in -1000i128..1000, den in 1i128..1000) {
        let r = Real::frac(num, den);
        let back: BigRational = exact(&(&r * Real::int(3) / Real::int(3)));
        prop_assert_eq!(back, rat(num, den));
    }
}
