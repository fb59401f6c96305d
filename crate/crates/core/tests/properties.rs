mod common;

use peakon_core::evolve::{self, shape_error, GchField, ShapeReference, VectorField};
use peakon_core::green;
use peakon_core::model::{self, make_peakon, zeta, Branch, Domain, ModelParams, TravelingProfile};
use peakon_core::residual::{self, Envelope, ResidualMode, SumTest, TestFunction, Verdict};
use peakon_core::spectral::{Fourier, Grid, GridState};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..3.0f64, Just(0.0)]
}

fn existing_params() -> impl Strategy<Value = ModelParams> {
    (coeff(), coeff(), -4.0..4.0f64)
        .prop_map(|(k1, k2, c)| ModelParams::new(k1, k2, c).unwrap())
        .prop_filter("needs a real amplitude", |p| {
            !p.is_degenerate() && model::solve_line_amplitudes(p).is_ok() && model::solve_periodic_amplitudes(p).is_ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_annihilate_defects(p in existing_params()) {
        for a in model::solve_line_amplitudes(&p).unwrap().roots {
            let scale = 1.0 + p.k1.abs() * a * a + p.k2.abs() * a.abs() + p.c.abs();
            prop_assert!(residual::line_amplitude_defect(a, &p).abs() <= 1e-12 * scale);
        }
        for a in model::solve_periodic_amplitudes(&p).unwrap().roots {
            let scale = 1.0 + 1.3 * p.k1.abs() * a * a + 1.2 * p.k2.abs() * a.abs() + p.c.abs();
            prop_assert!(residual::periodic_amplitude_defect(a, &p).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn zeta_is_periodic_and_bounded(s in -50.0..50.0f64) {
        let z = zeta(s);
        prop_assert!(z > -0.5 && z <= 0.5);
        prop_assert!((zeta(s + 1.0) - z).abs() < 1e-12);
    }

    #[test]
    fn line_closed_forms_are_odd(a in -3.0..3.0f64, k in -3.0..3.0f64, s in 0.0..20.0f64) {
        prop_assert_eq!(green::closedform_line_cubic(a, k, -s), -green::closedform_line_cubic(a, k, s));
        prop_assert_eq!(green::closedform_line_quadratic(a, k, -s), -green::closedform_line_quadratic(a, k, s));
    }

    #[test]
    fn circle_closed_forms_are_odd_about_half(a in -3.0..3.0f64, k in -3.0..3.0f64, s in 1e-3..0.499f64) {
        let tol = 1e-13 * (1.0 + a.abs().powi(3)) * (1.0 + k.abs());
        prop_assert!((green::closedform_circle_cubic(a, k, s) + green::closedform_circle_cubic(a, k, 1.0 - s)).abs() < tol);
        let q = green::closedform_circle_quadratic(a, k, s).unwrap() + green::closedform_circle_quadratic(a, k, 1.0 - s).unwrap();
        prop_assert!(q.abs() < tol);
    }

    #[test]
    fn semidiscrete_energy_balance_is_exact(seed in 0u64..10_000, k1 in -2.0..2.0f64, k2 in -2.0..2.0f64) {
        // sum (1 + k^2) conj(u_hat) rhs_hat = 0 for band-limited u
        let g = Grid::new(64).unwrap();
        let s = common::random_band_limited(&g, seed, 12, 0.6, 0.3);
        let rhs = GchField::new(ModelParams::new(k1, k2, 1.0).unwrap(), g, true).rhs(&s.u);
        let ops = Fourier::new(g);
        let (uh, rh) = (ops.forward(&s.u), ops.forward(&rhs));
        let mut balance = 0.0;
        let mut size = 0.0;
        for i in 0..64 {
            let w = 1.0 / peakon_core::spectral::helmholtz_symbol(g.mode(i));
            balance += w * (uh[i].conj() * rh[i]).re;
            size += w * uh[i].norm() * rh[i].norm();
        }
        prop_assert!(balance.abs() <= 1e-13 * (1.0 + size), "{} vs {}", balance, size);
    }

    #[test]
    fn shape_error_recovers_grid_shifts(shift in 0usize..256, p in existing_params()) {
        let g = Grid::new(256).unwrap();
        let prof = make_peakon(&p, Domain::Circle, Branch::Plus).unwrap();
        prop_assume!(prof.amplitude.abs() > 1e-3);
        let tau = shift as f64 / 256.0;
        let st = GridState::from_fn(&g, 0.0, |x| prof.shape(x - tau));
        let (err, found) = shape_error(&st, &ShapeReference::Profile(prof)).unwrap();
        let d = (found - tau) - (found - tau).round();
        // a negative-amplitude crest is a trough; correlation still locks on
        prop_assert!(d.abs() <= 0.25 / 256.0 + 1e-12, "{} vs {}", found, tau);
        prop_assert!(err < 1e-10, "{}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_residual_matches_quadrature(
        k1 in -2.0..2.0f64, k2 in -2.0..2.0f64, c in -2.0..2.0f64, a in -1.5..1.5f64,
        s in 0.01..0.99f64, line in any::<bool>(),
    ) {
        let p = ModelParams::new(k1, k2, c).unwrap();
        let (domain, x) = if line { (Domain::Line, 10.0 * s - 5.0) } else { (Domain::Circle, s) };
        prop_assume!(x.abs() > 0.02);
        let prof = TravelingProfile::new(domain, a, c);
        let cf = residual::strong_residual(&prof, &p, &[(0.0, x)], ResidualMode::ClosedForm).unwrap()[0];
        let q = residual::strong_residual(&prof, &p, &[(0.0, x)], ResidualMode::Quadrature).unwrap()[0];
        prop_assert!((cf - q).abs() < 1e-9, "{} vs {}", cf, q);
        // both equal the defect prefactor times the profile's odd part
        let expect = match domain {
            Domain::Line => x.signum() * (a * c - k1 * a.powi(3) - k2 * a * a) * (-x.abs()).exp(),
            Domain::Circle => -residual::pointwise_periodic_defect(a, &p, 0.0, x).unwrap(),
        };
        prop_assert!((cf - expect).abs() < 1e-12 * (1.0 + a.abs().powi(3)) * 8.0, "{} vs {}", cf, expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn weak_residual_is_additive(x0 in 0.0..1.0f64, x1 in 0.0..1.0f64, a in 0.3..1.5f64) {
        let p = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let prof = TravelingProfile::new(Domain::Circle, a, p.c);
        let f = TestFunction::new(x0, Envelope::Decay, 1.0);
        let h = TestFunction { weight: -0.7, ..TestFunction::new(x1, Envelope::Bump, 1.0) };
        let wf = residual::weak_residual(&prof, &p, &f).unwrap();
        let wh = residual::weak_residual(&prof, &p, &h).unwrap();
        let ws = residual::weak_residual(&prof, &p, &SumTest(f, h)).unwrap();
        prop_assert!((ws - wf - wh).abs() < 1e-10, "{} vs {}", ws, wf + wh);
    }

    #[test]
    fn weak_residual_factorizes_through_defect(factor in 0.5..1.5f64, j in 0usize..8) {
        let p = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let a = make_peakon(&p, Domain::Circle, Branch::Plus).unwrap().amplitude * factor;
        prop_assume!((factor - 1.0).abs() > 0.01);
        let prof = TravelingProfile::new(Domain::Circle, a, p.c);
        let expect = a * residual::periodic_amplitude_defect(a, &p);
        for e in Envelope::ALL {
            let phi = TestFunction::new(j as f64 / 8.0, e, 1.0);
            let w = residual::weak_residual(&prof, &p, &phi).unwrap();
            let m = residual::phi_sinh_moment(p.c, &phi).unwrap();
            if m.abs() < 1e-8 * phi.l1_norm().unwrap() {
                // moment vanishes by symmetry; so must the residual
                prop_assert!(w.abs() < 1e-10, "{}", w);
            } else {
                prop_assert!((w / m - expect).abs() <= 1e-6 * expect.abs(), "{} vs {}", w / m, expect);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn certification_is_sound(p in existing_params(), sign in prop_oneof![Just(-1.0), Just(1.0)]) {
        let opts = residual::CertifyOptions::default();
        for domain in [Domain::Line, Domain::Circle] {
            let prof = make_peakon(&p, domain, Branch::Plus).unwrap();
            prop_assume!(prof.amplitude.abs() > 0.05 && prof.amplitude.abs() < 3.0);
            let ok = residual::certify(&prof, &p, &opts).unwrap();
            prop_assert_eq!(ok.verdict, Verdict::Certified, "{:?}", ok);
            let bad = prof.with_amplitude(prof.amplitude * (1.0 + sign * 0.01));
            prop_assert_eq!(residual::certify(&bad, &p, &opts).unwrap().verdict, Verdict::Rejected);
        }
    }
}

#[test]
fn mollified_mean_is_unfiltered() {
    let p = ModelParams::new(0.5, 1.5, 1.0).unwrap();
    let g = Grid::new(128).unwrap();
    let prof = make_peakon(&p, Domain::Circle, Branch::Plus).unwrap();
    let raw: f64 = g.sample(|x| prof.shape(x)).iter().sum::<f64>() / 128.0;
    for strength in [1.0, 1.5, 36.0] {
        let m = evolve::mollified_peakon_initial(&p, g, Branch::Plus, strength).unwrap();
        let mean: f64 = m.u.iter().sum::<f64>() / 128.0;
        assert!((mean - raw).abs() < 1e-15);
    }
}
