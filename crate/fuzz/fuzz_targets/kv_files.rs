#![no_main]
use libfuzzer_sys::fuzz_target;
use nidt::config::RunConfig;
use nidt::features::{FeatureSelection, ScalerParams};
use nidt::kv::KvDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = KvDocument::parse(text) else { return };
    assert_eq!(KvDocument::parse(&doc.to_string()).unwrap(), doc);
    if let Ok(config) = RunConfig::from_kv(&doc) {
        assert_eq!(RunConfig::from_kv(&config.to_kv()).unwrap().to_kv(), config.to_kv());
    }
    if let Ok(sel) = FeatureSelection::from_kv(&doc) {
        assert_eq!(FeatureSelection::from_kv(&sel.to_kv()).unwrap(), sel);
    }
    if let Ok(scaler) = ScalerParams::from_kv(&doc) {
        assert_eq!(ScalerParams::from_kv(&scaler.to_kv()).unwrap(), scaler);
    }
});
