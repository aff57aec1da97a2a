use proptest::prelude::*;

use parsets_core::contents::{check_isoperimetric, check_kneser, check_stacho, normalized_series, ContentKind};
use parsets_core::io::{parse_profile, write_profile};
use parsets_core::selfsimilar::{classify_lattice, r_function, similarity_dimension};
use parsets_core::stochastic::phi;
use parsets_core::{
    brute_edt, exact_edt, geometric_radii, make_grid, sample_profile, shape_profile, BinaryMask, BoundingBox,
    RadialProfile, Shape, Source,
};

fn mask_strategy(dim: usize, max_n: usize) -> impl Strategy<Value = BinaryMask> {
    (2..=max_n).prop_flat_map(move |n| {
        let len = n.pow(dim as u32);
        prop::collection::vec(prop::bool::weighted(0.1), len).prop_filter_map("empty mask", move |cells| {
            let grid = make_grid(&BoundingBox::cube(dim, 0.0, 1.0), n, dim).ok()?;
            cells.iter().any(|&c| c).then(|| BinaryMask::from_cells(grid, cells).unwrap())
        })
    })
}

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.05..2.0f64).prop_map(|radius| Shape::Disk { radius }),
        (0.05..2.0f64).prop_map(|radius| Shape::Ball { radius }),
        (0.05..2.0f64).prop_map(|side| Shape::Square { side }),
        (0.05..2.0f64).prop_map(|length| Shape::Segment { length }),
        (2usize..=3).prop_map(|dim| Shape::Point { dim }),
    ]
}

fn neighbors(grid: &parsets_core::GridSpec, idx: [usize; 3]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..grid.dim() {
        if idx[a] + 1 < grid.n() {
            let mut j = idx;
            j[a] += 1;
            out.push(j);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edt_matches_brute_force_2d(mask in mask_strategy(2, 24)) {
        let a = exact_edt(&mask).unwrap();
        let b = brute_edt(&mask).unwrap();
        prop_assert_eq!(a.squared_cells(), b.squared_cells());
    }

    #[test]
    fn edt_matches_brute_force_3d(mask in mask_strategy(3, 9)) {
        let a = exact_edt(&mask).unwrap();
        let b = brute_edt(&mask).unwrap();
        prop_assert_eq!(a.squared_cells(), b.squared_cells());
    }

    #[test]
    fn distance_is_lipschitz_and_zero_on_the_set(mask in mask_strategy(2, 24)) {
        let f = exact_edt(&mask).unwrap();
        let g = f.grid().clone();
        for lin in 0..g.len() {
            let idx = g.unlinear(lin);
            prop_assert_eq!(f.dist(lin) == 0.0, mask.get(idx));
            for j in neighbors(&g, idx) {
                let d = (f.dist(lin) - f.dist(g.linear(j))).abs();
                prop_assert!(d <= g.h() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn grid_profile_volume_is_monotone(mask in mask_strategy(2, 24), per_octave in 1usize..8) {
        let f = exact_edt(&mask).unwrap();
        let h = f.grid().h();
        let radii = geometric_radii(2.0 * h, 8.0 * h, per_octave).unwrap();
        let p = sample_profile(&f, &radii).unwrap();
        prop_assert!(p.volume.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(p.surface.iter().all(|&s| s >= 0.0));
        prop_assert!(p.volume[0] >= p.v0);
    }

    #[test]
    fn rescaling_commutes_with_exact_profiles(shape in shape_strategy(), lambda in 0.1..10.0f64) {
        let radii = geometric_radii(1e-2, 1.0, 4).unwrap();
        let p = shape_profile(&shape, &radii).unwrap().rescaled(lambda);
        let scaled = match shape {
            Shape::Disk { radius } => Shape::Disk { radius: radius * lambda },
            Shape::Ball { radius } => Shape::Ball { radius: radius * lambda },
            Shape::Square { side } => Shape::Square { side: side * lambda },
            Shape::Segment { length } => Shape::Segment { length: length * lambda },
            other => other,
        };
        let q = shape_profile(&scaled, &p.radii).unwrap();
        for k in 0..p.len() {
            prop_assert!((p.volume[k] / q.volume[k] - 1.0).abs() < 1e-12);
            prop_assert!((p.surface[k] / q.surface[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_series_is_scale_covariant(shape in shape_strategy(), lambda in 0.1..10.0f64) {
        // At matched radii the exponent-s series of λA is λ^s times that of A.
        let radii = geometric_radii(1e-2, 1.0, 4).unwrap();
        let p = shape_profile(&shape, &radii).unwrap();
        let s = p.dim as f64 - 1.0;
        let a = normalized_series(&p, s, ContentKind::Surface).unwrap().values;
        let b = normalized_series(&p.rescaled(lambda), s, ContentKind::Surface).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((lambda.powf(s) * x / y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_profiles_pass_checkers(shape in shape_strategy()) {
        let radii = geometric_radii(1e-3, 1.0, 8).unwrap();
        let p = shape_profile(&shape, &radii).unwrap();
        prop_assert!(check_kneser(&p).unwrap().passed);
        prop_assert!(check_stacho(&p).unwrap().passed);
        prop_assert!(check_isoperimetric(&p).unwrap().passed);
    }

    #[test]
    fn similarity_dimension_solves_moran(ratios in prop::collection::vec(0.01..0.99f64, 2..8)) {
        let d = similarity_dimension(&ratios).unwrap();
        let sum: f64 = ratios.iter().map(|r| r.powf(d)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn equal_ratios_are_arithmetic(r in 0.01..0.99f64, n in 2usize..6) {
        let lat = classify_lattice(&vec![r; n], 1_000_000).unwrap();
        prop_assert!(lat.is_arithmetic());
    }

    #[test]
    fn r_function_is_linear_in_surface(lambda in 0.01..100.0f64) {
        let radii = geometric_radii(1e-3, 1.0, 8).unwrap();
        let p = shape_profile(&Shape::Disk { radius: 0.3 }, &radii).unwrap();
        let mut q = p.clone();
        q.surface.iter_mut().for_each(|s| *s *= lambda);
        let a = r_function(&p, &[0.5, 0.25]).unwrap();
        let b = r_function(&q, &[0.5, 0.25]).unwrap();
        prop_assert_eq!(a.radii.len(), b.radii.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((lambda * x - y).abs() <= 1e-12 * (lambda * x).abs().max(1e-300) + 1e-12 * lambda);
        }
    }

    #[test]
    fn phi_stays_in_unit_interval(z in 0.0..1e3f64, d in 2usize..=3) {
        let v = phi(d, z);
        prop_assert!((-1e-15..=1.0).contains(&v), "phi({d}, {z}) = {v}");
    }

    #[test]
    fn profile_text_round_trips(
        dim in 2usize..=3,
        base in prop::collection::vec(0.1..10.0f64, 2..20),
        grid in any::<bool>(),
    ) {
        let n = base.len();
        let radii: Vec<f64> = (0..n).map(|k| 1e-3 * 1.5f64.powi(k as i32)).collect();
        let mut v = 0.0;
        let volume: Vec<f64> = base.iter().map(|b| { v += b; v }).collect();
        let source = if grid { Source::Grid } else { Source::Analytic };
        let mut p = RadialProfile::new(dim, radii, volume, base.clone(), 0.0, source).unwrap();
        if grid {
            p = p.with_aux(base.iter().map(|b| b * 0.5).collect()).with_cell_size(1e-4);
        }
        let q = parse_profile(&write_profile(&p)).unwrap();
        prop_assert_eq!(p, q);
    }
}
