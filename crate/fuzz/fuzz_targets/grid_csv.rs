#![no_main]
use lattice::read_grid_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_grid_csv(data);
});
