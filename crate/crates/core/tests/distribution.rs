use record_gof::dist::{weibull_cdf, weibull_pdf, Lifetime, WeibullParams};
use record_gof::quad::integrate;

const SHAPES: [f64; 5] = [0.5, 0.8, 1.0, 2.0, 5.0];
const SCALES: [f64; 3] = [0.1, 1.0, 30.0];

#[test]
fn density_integrates_to_one() {
    // Integrate over t = ln x so both tails stay on a finite interval.
    for alpha in SHAPES {
        for sigma in SCALES {
            let p = WeibullParams::new(alpha, sigma).unwrap();
            let lo = sigma.ln() - 50.0 / alpha;
            let hi = sigma.ln() + 800.0_f64.ln() / alpha;
            let total = integrate(|t: f64| p.pdf(t.exp()) * t.exp(), lo, hi, 1e-11).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "alpha={alpha} sigma={sigma}: {total}");
        }
    }
}

#[test]
fn cdf_is_integrated_density() {
    for alpha in SHAPES {
        for sigma in SCALES {
            let p = WeibullParams::new(alpha, sigma).unwrap();
            for q in [0.05, 0.3, 0.632, 0.9] {
                let x = p.quantile(q);
                let lo = sigma.ln() - 60.0 / alpha;
                let mass = integrate(|t: f64| weibull_pdf(&p, t.exp()).unwrap() * t.exp(), lo, x.ln(), 1e-12).unwrap();
                let cdf = weibull_cdf(&p, x).unwrap();
                assert!((mass - cdf).abs() < 1e-9, "alpha={alpha} sigma={sigma} q={q}");
                assert!((cdf - q).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn characteristic_life() {
    for alpha in SHAPES {
        let p = WeibullParams::new(alpha, 7.5).unwrap();
        assert!((p.cdf(7.5) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
