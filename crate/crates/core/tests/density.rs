mod common;

use nmpgap::channel::ChannelSpec;
use nmpgap::density::{ga_entropy, Grid, LDensity};
use rand::Rng;

fn random_density(rng: &mut rand_chacha::ChaCha8Rng, grid: &std::sync::Arc<Grid>) -> LDensity {
    let a = LDensity::quantize_awgn(grid, &ChannelSpec::new(rng.random_range(0.4..2.5)).unwrap());
    let b = LDensity::quantize_awgn(grid, &ChannelSpec::new(rng.random_range(0.4..2.5)).unwrap());
    let w = rng.random_range(0.0..1.0);
    LDensity::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap()
}

#[test]
fn quantized_channel_entropy_matches_quadrature() {
    let grid = Grid::standard();
    for sigma in [0.5, 0.97865, 1.5] {
        let d = LDensity::quantize_awgn(&grid, &ChannelSpec::new(sigma).unwrap());
        let q = common::awgn_entropy_quadrature(sigma);
        assert!((d.entropy() - q).abs() < 1e-3, "sigma {sigma}: {} vs {q}", d.entropy());
        assert!((ga_entropy(2.0 / (sigma * sigma)) - q).abs() < 1e-6);
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn duality_on_random_pairs() {
    let grid = Grid::standard();
    let mut rng = common::rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_density(&mut rng, &grid);
        let b = random_density(&mut rng, &grid);
        let lhs = a.cn_convolve(&b).unwrap().entropy() + a.vn_convolve(&b).unwrap().entropy();
        worst = worst.max((lhs - a.entropy() - b.entropy()).abs());
    }
    eprintln!("worst duality residue {worst:.3e}");
    assert!(worst <= 5e-3, "worst duality residue {worst}");
}

#[test]
fn convolutions_commute_and_associate() {
    let grid = Grid::standard();
    let mut rng = common::rng(12);
    for _ in 0..10 {
        let (a, b, c) = (random_density(&mut rng, &grid), random_density(&mut rng, &grid), random_density(&mut rng, &grid));
        let h = |d: LDensity| d.entropy();
        let vn = |x: &LDensity, y: &LDensity| x.vn_convolve(y).unwrap();
        let cn = |x: &LDensity, y: &LDensity| x.cn_convolve(y).unwrap();
        assert!((h(vn(&a, &b)) - h(vn(&b, &a))).abs() < 1e-6);
        assert!((h(cn(&a, &b)) - h(cn(&b, &a))).abs() < 1e-6);
        assert!((h(vn(&vn(&a, &b), &c)) - h(vn(&a, &vn(&b, &c)))).abs() < 1e-6);
        let r = (h(cn(&cn(&a, &b), &c)) - h(cn(&a, &cn(&b, &c)))).abs();
        assert!(r < 1e-6, "cn assoc {r}");
    }
}
