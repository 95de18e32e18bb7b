#![no_main]

use jackratio::esym::EPolynomial;
use jackratio::rational::parse_rational;
use jackratio::Partition;
use libfuzzer_sys::fuzz_target;
use serde_json::{Map, Value};

fuzz_target!(|data: &[u8]| {
    let Ok(map) = serde_json::from_slice::<Map<String, Value>>(data) else { return };
    let mut terms = Vec::new();
    for (k, v) in &map {
        let Ok(p) = k.parse::<Partition>() else { return };
        let Some(s) = v.as_str() else { return };
        let Ok(q) = parse_rational(s) else { return };
        terms.push((p, q));
    }
    let m = terms.iter().map(|(p, _)| p.len()).max().unwrap_or(0).max(1);
    let _ = EPolynomial::from_terms(m, terms);
});
