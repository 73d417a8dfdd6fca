#![no_main]
use libfuzzer_sys::fuzz_target;
use nidt::dataset::{feature_matrix, fit_encoding, read_raw_rows};
use nidt::schema::Schema;

fuzz_target!(|data: &[u8]| {
    let schema = Schema::unsw_nb15();
    if let Ok(rows) = read_raw_rows(data, &schema) {
        if let Ok(enc) = fit_encoding(&rows, &schema, &schema.categorical_names()) {
            let _ = feature_matrix(&rows, &schema, &enc);
        }
    }
});
