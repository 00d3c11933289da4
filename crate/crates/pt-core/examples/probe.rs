use num_complex::Complex64;
use pt_core::bessel::{delta_table, j0_first_zero};
use pt_core::domain::*;
use pt_core::recurrence::{origin_jet_outer, OdeParams};
use pt_core::series::{series_div, series_mul, series_root, ComplexSeries};

fn coeffs_for(x: f64, r: f64, m: usize) -> (Vec<Complex64>, f64) {
    let opts = BuildOptions::default();
    let spec = build_domain(x, r, &opts).unwrap();
    let cap = spec.cap;
    let pts = chain_points(x, r, GeometryReading::PaperPrimary).unwrap();
    let anchors = phi_anchors(&pts, r).unwrap();
    let br = spec.solution.b_points[0];
    let bl = spec.solution.b_points[1];
    let params = OdeParams::outer(anchors, vec![br, br, bl, bl]);
    let u = origin_jet_outer(&params, Complex64::new(cap, 0.0), m).unwrap();
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
    (cb.coeffs, cap)
}

fn main() {
    // Frequency at paper truncation n <= 97 (33 nonzero terms).
    let (cf, _) = coeffs_for(2.1282995811037759, 5.10223601895443, 200);
    let j0 = j0_first_zero();
    let dt = delta_table(100);
    let mut s = 0.0;
    for (k, c) in cf.iter().enumerate().take(34) {
        let n = 3 * k + 1;
        s += c.norm_sqr() * dt[n - 1];
        if (85..=112).contains(&n) {
            println!("freq n<={n}: {:.12} (target 2.0907934752309)", j0 * j0 / s);
        }
    }
    // Area partial sums for extrapolation testing (lifetime case).
    let r = 5.1836816989_f64;
    let (cl, _) = coeffs_for(2.174447128952, r, 10000);
    let mut area = 0.0;
    let mut out = String::new();
    for (k, c) in cl.iter().enumerate() {
        let n = (3 * k + 1) as f64;
        area += n * c.norm_sqr();
        if (k + 1) % 250 == 0 {
            out.push_str(&format!("{} {:.12}\n", 3 * k + 1, area));
        }
    }
    std::fs::write("/tmp/area_sums.txt", out).unwrap();
    let mut cf2 = String::new();
    for (k, c) in cl.iter().enumerate() {
        cf2.push_str(&format!("{} {:.17e} {:.17e}\n", 3 * k + 1, c.re, c.im));
    }
    std::fs::write("/tmp/coeffs.txt", cf2).unwrap();
    println!("R^2 = {:.12}; wrote /tmp/area_sums.txt", r * r);
}
