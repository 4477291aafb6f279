use floor_relu::construct::{
    build_theorem1, build_theorem2, sample_and_quantize, wrap_domain, BuildOptions, Grid, Normalization,
};
use floor_relu::modulus::{Coefficient, ModulusSpec};
use floor_relu::target::{lookup, FnTarget, TargetFunction};
use floor_relu::verify::{check_certificate, measure_sup_error, Sampling};
use floor_relu::{Dyadic, Interval};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const TARGETS: [&str; 5] = ["mean", "product", "min", "spike", "const:value=2/7"];

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificates_are_sound(t in 0usize..5, d in 1usize..3, n in 2u64..4, l in 1u64..3, seed in any::<u64>()) {
        prop_assume!(d == 1 || n.pow(l as u32) <= 4);
        let f = lookup(TARGETS[t], d, None).unwrap();
        let (net, cert) = build_theorem2(&f, n, l, &BuildOptions::default()).unwrap();
        prop_assert!(cert.sizes_ok());
        prop_assert_eq!(net.audit(), cert.audit);
        prop_assert_eq!(cert.recompute_bound().unwrap(), cert.bound.clone());
        let (r, _) = check_certificate(&net, &f, &cert, None, seed).unwrap();
        prop_assert!(r.pass, "{} d={} N={} L={}: {} > {}", TARGETS[t], d, n, l, r.max_abs_error, cert.bound);
    }

    #[test]
    fn corners_match_quantized_samples(t in 0usize..5, d in 1usize..3, l in 1u64..3) {
        let f = lookup(TARGETS[t], d, None).unwrap();
        let (net, cert) = build_theorem2(&f, 2, l, &BuildOptions::default()).unwrap();
        let norm = Normalization::compute(&f, 64).unwrap();
        let grid = Grid::new(d, cert.k).unwrap();
        let bits = 2 * l as u32;
        let table = sample_and_quantize(&f, grid, bits, &norm, 64).unwrap();
        let ulp = Dyadic::pow2(-(bits as i64));
        for i in 1..=grid.cells() {
            let x: Vec<Dyadic> = grid.beta(i).iter().map(|b| Dyadic::from_int(*b) * Dyadic::pow2(-(l as i64))).collect();
            let phi = net.eval_exact(&x).unwrap().swap_remove(0);
            // compare 2Ω·φ̃ against 2Ω·f̃ so that no division is needed
            let two_omega = norm.omega.shift(1);
            let scaled = &phi - &(&norm.f0 - &norm.omega);
            let exact = &table.normalized[(i - 1) as usize];
            let slack = &ulp * &two_omega;
            prop_assert!(&scaled - &(exact.lo() * &two_omega) <= slack);
            prop_assert!(&(exact.hi() * &two_omega) - &scaled <= slack);
        }
    }

    #[test]
    fn lipschitz_affine_targets(a in -8i64..=8, c in -8i64..=8, n in 2u64..4, l in 1u64..3, seed in any::<u64>()) {
        let slope = rat(a, 3);
        let lambda = Coefficient::Rational(num_traits::Signed::abs(&slope));
        let s2 = slope.clone();
        let f = FnTarget::new("affine", 1, ModulusSpec::lipschitz(lambda), move |x: &[BigRational], p| {
            Ok(Interval::from_rational(&(&x[0] * &s2 + rat(c, 5)), p))
        });
        let (net, cert) = build_theorem2(&f, n, l, &BuildOptions::default()).unwrap();
        let r = measure_sup_error(&net, &f, &Sampling::Union { parts: vec![
            Sampling::Cells { k: cert.k },
            Sampling::Random { count: 200, seed },
        ]}, &cert.bound).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn theorem1_sizes_hold(d in 1usize..3, n in 1u64..4, l in 1u64..3) {
        prop_assume!(d == 1 || (n <= 3 && l == 1));
        let f = lookup("min", d, None).unwrap();
        let (net, cert) = build_theorem1(&f, n, l, &BuildOptions::default()).unwrap();
        let a = net.audit();
        prop_assert!(a.width as u64 <= (d as u64).max(5 * n + 13));
        prop_assert!(a.depth as u64 <= 64 * d as u64 * l + 3);
        let (r, _) = check_certificate(&net, &f, &cert, None, 1).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn min_is_one_lipschitz(x in prop::collection::vec(0i64..=1024, 3), y in prop::collection::vec(0i64..=1024, 3)) {
        let f = lookup("min", 3, None).unwrap();
        let xs: Vec<BigRational> = x.iter().map(|v| rat(*v, 1024)).collect();
        let ys: Vec<BigRational> = y.iter().map(|v| rat(*v, 1024)).collect();
        let fx = f.enclose(&xs, 80).unwrap().midpoint().to_rational();
        let fy = f.enclose(&ys, 80).unwrap().midpoint().to_rational();
        let gap = num_traits::Signed::abs(&(fx - fy));
        let dist2: BigRational = xs.iter().zip(&ys).map(|(a, b)| (a - b) * (a - b)).sum();
        prop_assert!(&gap * &gap <= dist2);
    }
}

#[test]
fn domain_wrapped_product_is_sound() {
    let m = Dyadic::from_int(2);
    let f = lookup("product", 2, Some(&m)).unwrap();
    let (net, cert) = wrap_domain(f.clone(), &m, 2, 2, 1, &BuildOptions::default()).unwrap();
    assert_eq!(cert.domain_half_width, Some(m));
    let (r, rows) = check_certificate(&net, &f, &cert, Some(9), 4).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(rows.iter().any(|row| row.x[0] == Dyadic::from_int(-2)));
}
