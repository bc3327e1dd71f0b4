use freqcause::filters::hp_filter;

fn wiggly(len: usize) -> Vec<f64> {
    (0..len)
        .map(|t| {
            let t = t as f64;
            2.0 + 0.1 * t + (0.7 * t).sin() + 0.3 * (2.3 * t).cos()
        })
        .collect()
}

#[test]
fn tiny_lambda_keeps_the_series() {
    let y = wiggly(80);
    let hp = hp_filter(&y, 1e-10).unwrap();
    for (a, b) in hp.trend.iter().zip(&y) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn huge_lambda_gives_least_squares_line() {
    let y = wiggly(100);
    let n = y.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let sxy: f64 = y.iter().enumerate().map(|(t, v)| (t as f64 - tbar) * (v - ybar)).sum();
    let sxx: f64 = (0..y.len()).map(|t| (t as f64 - tbar).powi(2)).sum();
    let slope = sxy / sxx;
    let hp = hp_filter(&y, 1e12).unwrap();
    for (t, trend) in hp.trend.iter().enumerate() {
        let line = ybar + slope * (t as f64 - tbar);
        assert!((trend - line).abs() <= 1e-4 * line.abs(), "t = {t}: {trend} vs {line}");
    }
}

#[test]
fn quarterly_default_smooths() {
    let y = wiggly(76);
    let hp = hp_filter(&y, 1600.0).unwrap();
    let rough = |v: &[f64]| v.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).powi(2)).sum::<f64>();
    assert!(rough(&hp.trend) < 0.01 * rough(&y));
    assert_eq!(hp.lambda, 1600.0);
}
