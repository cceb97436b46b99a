#![allow(dead_code)]

pub mod oracles;

use swarmselect::FeatureMask;

/// Fraction of bits agreeing with `target`.
pub fn planted(target: &FeatureMask) -> impl Fn(&FeatureMask) -> swarmselect::Result<f64> + Sync + Send + Clone + '_ {
    move |m: &FeatureMask| {
        let same = m.bits().iter().zip(target.bits()).filter(|(a, b)| a == b).count();
        Ok(same as f64 / m.len() as f64)
    }
}

pub fn onemax(m: &FeatureMask) -> swarmselect::Result<f64> {
    Ok(m.count_ones() as f64 / m.len() as f64)
}

/// One line per acceptance check. Written straight to stderr so the test
/// harness does not capture it.
pub fn report(label: &str, pass: bool, detail: &str) {
    use std::io::Write;
    let line = format!("{} {label}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}
