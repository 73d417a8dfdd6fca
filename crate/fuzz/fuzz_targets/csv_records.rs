#![no_main]
use libfuzzer_sys::fuzz_target;
use nidt::dataset::{read_records, write_records};
use nidt::schema::Schema;

fuzz_target!(|data: &[u8]| {
    let schema = Schema::unsw_nb15();
    if let Ok(records) = read_records(data, &schema) {
        // Anything accepted must survive a write/read cycle unchanged.
        let mut buf = Vec::new();
        write_records(&mut buf, &schema, &records).unwrap();
        assert_eq!(read_records(buf.as_slice(), &schema).unwrap(), records);
    }
});
