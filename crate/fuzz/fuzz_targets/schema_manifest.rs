#![no_main]
use libfuzzer_sys::fuzz_target;
use nidt::schema::Schema;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(schema) = Schema::parse(text) {
            assert_eq!(Schema::parse(&schema.to_string()).unwrap(), schema);
        }
    }
});
