use num_complex::Complex64;
use pt_core::domain::*;
use pt_core::recurrence::{origin_jet_outer, OdeParams};
use pt_core::series::{series_div, series_mul, series_root, ComplexSeries};
use std::time::Instant;

fn main() {
    let m: usize = std::env::args().nth(1).unwrap().parse().unwrap();
    let x = 2.174447128952;
    let r = 5.1836816989_f64;
    let opts = BuildOptions::default();
    let spec = build_domain(x, r, &opts).unwrap();
    let cap = spec.cap;
    let pts = chain_points(x, r, GeometryReading::PaperPrimary).unwrap();
    let anchors = phi_anchors(&pts, r).unwrap();
    let br = spec.solution.b_points[0];
    let bl = spec.solution.b_points[1];
    let params = OdeParams::outer(anchors, vec![br, br, bl, bl]);
    let t0 = Instant::now();
    let u = origin_jet_outer(&params, Complex64::new(cap, 0.0), m).unwrap();
    println!("jet {m}: {:.2?}", t0.elapsed());
    let t1 = Instant::now();
    let d = delta(r);
    let psi1 = psi_at_one(r);
    let mut ncoef: Vec<Complex64> = u.coeffs.iter().map(|c| d * c).collect();
    ncoef[1] += psi1 - 2.0;
    let nser = ComplexSeries::from_coeffs(ncoef);
    let mut p2 = series_mul(&nser, &nser);
    p2.coeffs[2] -= 4.0;
    let sq = series_root(&p2, 2, Complex64::new(d * cap, 0.0)).unwrap();
    let den = ComplexSeries::from_coeffs(
        nser.coeffs.iter().zip(&sq.coeffs).map(|(a, b)| a + b).collect(),
    );
    let num = ComplexSeries::constant(Complex64::new(-2.0 * r.powi(3), 0.0), den.order());
    let qt = series_div(&num, &den).unwrap();
    let cb = series_root(&qt, 3, qt.coeffs[0].powf(1.0 / 3.0)).unwrap();
    println!("post-chain: {:.2?}", t1.elapsed());
    let mut s = 0.0;
    for (k, c) in cb.coeffs.iter().enumerate() {
        s += (3 * k + 1) as f64 * c.norm_sqr();
    }
    println!("partial area sum n<={}: {:.9} (R^2 {:.9})", 3 * (m - 1) + 1, s, r * r);
    let mut cf2 = String::new();
    for (k, c) in cb.coeffs.iter().enumerate() {
        cf2.push_str(&format!("{} {:.17e} {:.17e}\n", 3 * k + 1, c.re, c.im));
    }
    std::fs::write("/tmp/coeffs_big.txt", cf2).unwrap();
}
