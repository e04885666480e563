#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = attsync::export::read_trace_csv(data) {
        let _ = attsync::export::group_by_time(&rows);
    }
});
