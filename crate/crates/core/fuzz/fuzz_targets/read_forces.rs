#![no_main]

use fbgforce::io::{read_forces, write_forces};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(forces) = read_forces(data) else { return };
    let mut buf = Vec::new();
    write_forces(&mut buf, &forces).unwrap();
    let again = read_forces(buf.as_slice()).unwrap();
    assert_eq!(again.fx1, forces.fx1);
    assert_eq!(again.fz, forces.fz);
    assert_eq!(again.nins_pm, forces.nins_pm);
});
