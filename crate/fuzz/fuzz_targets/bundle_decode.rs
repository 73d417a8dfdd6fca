#![no_main]
use libfuzzer_sys::fuzz_target;
use nidt::transfer::decode_bundle;

fuzz_target!(|data: &[u8]| {
    if let Ok(bundle) = decode_bundle(data) {
        // The header JSON may be non-canonical, so compare decoded values.
        assert_eq!(decode_bundle(&bundle.encode()).unwrap(), bundle);
    }
});
