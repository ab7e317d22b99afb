use arnold_lab::classify::ClassifyBudget;
use arnold_lab::raster::*;
use arnold_lab::Parameters;

fn mirrored_columns(img: &GrayImage) -> bool {
    (0..img.height).all(|y| (0..img.width).all(|x| img.get(x, y) == img.get(img.width - 1 - x, y)))
}

#[test]
fn parameter_plane_is_mirror_symmetric() {
    let img = render_parameter_plane(&Region::FULL_PARAMETER_PLANE, 60, 40, &RENDER_BUDGET).unwrap();
    assert!(mirrored_columns(&img));
}

#[test]
fn more_budget_never_blackens_white() {
    let region = Region::new(-1.5, 1.5, 1.0, 3.5).unwrap();
    let small = ClassifyBudget {
        transient: 1024,
        ..RENDER_BUDGET
    };
    let large = ClassifyBudget {
        transient: 2048,
        ..RENDER_BUDGET
    };
    let a = render_parameter_plane(&region, 40, 40, &small).unwrap();
    let b = render_parameter_plane(&region, 40, 40, &large).unwrap();
    for (pa, pb) in a.pixels.iter().zip(&b.pixels) {
        if *pa == WHITE {
            assert_ne!(*pb, BLACK);
        }
    }
}

#[test]
fn dynamical_plane_conjugation_symmetry() {
    let region = Region::new(-2.5, 2.5, -2.0, 2.0).unwrap();
    let budget = FateBudget::default();
    let a = render_dynamical_plane(&Parameters::new(0.7, 1.3).unwrap(), &region, 51, 40, &budget).unwrap();
    let b = render_dynamical_plane(&Parameters::new(-0.7, 1.3).unwrap(), &region, 51, 40, &budget).unwrap();
    for y in 0..a.height {
        for x in 0..a.width {
            assert_eq!(a.get(x, y), b.get(x, a.height - 1 - y));
        }
    }
}

#[test]
fn dynamical_plane_has_escape_shades() {
    let region = Region::new(-3.0, 3.0, -3.0, 3.0).unwrap();
    let img = render_dynamical_plane(
        &Parameters::new(0.0, 1.0).unwrap(),
        &region,
        200,
        200,
        &FateBudget::default(),
    )
    .unwrap();
    let mut shades: Vec<u8> = img.pixels.iter().copied().filter(|&v| (40..220).contains(&v)).collect();
    shades.sort_unstable();
    shades.dedup();
    assert!(!shades.is_empty());
}

#[test]
fn unit_circle_pixels_are_not_escape_shaded() {
    // The single pixel center is z = 1 exactly.
    let region = Region::new(0.0, 2.0, -1.0, 1.0).unwrap();
    for alpha in [-2.0, 0.0, 0.4, 3.0] {
        let img = render_dynamical_plane(
            &Parameters::new(alpha, 2.5).unwrap(),
            &region,
            1,
            1,
            &FateBudget::default(),
        )
        .unwrap();
        assert!(img.pixels[0] == 255 || img.pixels[0] == 0);
    }
}

#[test]
fn pgm_round_trip_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let region = Region::new(-3.0, 3.0, 0.0, 4.0).unwrap();
    let img = render_parameter_plane(&region, 23, 17, &RENDER_BUDGET).unwrap();
    let (p1, p2) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    write_pgm(&img, &p1).unwrap();
    write_pgm(&render_parameter_plane(&region, 23, 17, &RENDER_BUDGET).unwrap(), &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    let decoded = image::open(&p1).unwrap().into_luma8();
    assert_eq!((decoded.width() as usize, decoded.height() as usize), (23, 17));
    assert_eq!(decoded.into_raw(), img.pixels);
}

#[test]
fn write_to_missing_directory_fails() {
    let img = render_parameter_plane(&Region::new(-0.1, 0.1, 0.4, 0.6).unwrap(), 1, 1, &RENDER_BUDGET).unwrap();
    let err = write_pgm(&img, std::path::Path::new("/nonexistent-dir/x.pgm")).unwrap_err();
    assert_eq!(err.name(), "IoError");
}
