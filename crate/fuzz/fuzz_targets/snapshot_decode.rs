#![no_main]

use jackratio::snapshot::Snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snapshot) = Snapshot::decode(data) {
        for entry in &snapshot.tables {
            let _ = entry.decode();
        }
        assert_eq!(Snapshot::decode(snapshot.to_json().as_bytes()).unwrap(), snapshot);
    }
});
