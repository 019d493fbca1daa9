use rtls::bounds;
use rtls::problems::io::{parse_problem, to_string, ProblemFile};
use rtls::problems::{cosine_image, GeneratorSpec, NormalStream, DEFAULT_COSINE_COEFFS};
use rtls::{btd_solve, SolverConfig};

// Values recorded from the first build; any change in the generator,
// the RNG stream or the normal transform shows up here.
#[test]
fn noisy_shaw_checksum() {
    let g = GeneratorSpec::Shaw { n: 20 }.generate(0.05, 2024, 0.5).unwrap();
    let a = g.instance.a();
    assert_eq!(a.sum(), 42.28821513145789);
    assert_eq!(a.norm_squared(), 14.807507389374402);
    assert_eq!(a[(0, 0)], 0.0300448029807042);
    assert_eq!(g.instance.b().sum(), 41.09376709215229);
}

#[test]
fn normal_stream_prefix() {
    let mut s = NormalStream::new(0);
    assert_eq!(s.next_normal(), -1.5355413474037047);
    assert_eq!(s.next_normal(), 0.3339089401215209);
    assert_eq!(s.next_normal(), 1.4404617263059913);
}

#[test]
fn default_cosine_image() {
    let x = cosine_image(32, &DEFAULT_COSINE_COEFFS).unwrap();
    assert_eq!(x.len(), 1024);
    assert_eq!(x[0], 0.033266513717018754);
    assert_eq!(x[1], 0.024167666752713556);
    assert!((x.norm() - 1.0).abs() < 1e-14);
}

#[test]
fn generated_files_are_byte_identical() {
    let spec: GeneratorSpec = "shaw:12".parse().unwrap();
    let a = to_string(&ProblemFile::from(spec.generate(0.1, 5, 0.5).unwrap()));
    let b = to_string(&ProblemFile::from(spec.generate(0.1, 5, 0.5).unwrap()));
    assert_eq!(a, b);
    let back = parse_problem(&a).unwrap();
    assert_eq!(to_string(&back), a);
}

#[test]
fn noise_free_shaw_satisfies_assumption() {
    let g = GeneratorSpec::Shaw { n: 20 }.generate(0.0, 0, 0.5).unwrap();
    assert!(bounds::check_assumption(&g.instance, bounds::ASSUMPTION_TOL).unwrap().holds);
}

#[test]
fn small_blur_instance_solves() {
    let g = GeneratorSpec::Blur { n: 64, band: 3 }.generate(0.05, 1, 0.5).unwrap();
    assert_eq!(g.instance.k(), 64);
    let r = btd_solve(&g.instance, &SolverConfig::default()).unwrap();
    assert!(r.certified_gap.unwrap() <= 1e-6);
    assert!(r.iterations <= 30, "{}", r.iterations);
}

/// Full-size image problem; takes minutes in debug builds.
#[test]
#[ignore]
fn blur_1024_iteration_counts() {
    let spec = GeneratorSpec::Blur { n: 1024, band: 3 };
    let mut total = 0;
    for seed in 1..=3 {
        let g = spec.generate(0.5, seed, 0.5).unwrap();
        total += btd_solve(&g.instance, &SolverConfig::default()).unwrap().iterations;
    }
    assert!(total as f64 / 3.0 <= 25.0, "mean {}", total as f64 / 3.0);
}
