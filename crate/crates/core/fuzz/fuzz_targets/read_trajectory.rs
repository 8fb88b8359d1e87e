#![no_main]

use fbgforce::io::{read_trajectory, write_trajectory};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(traj) = read_trajectory(data) else { return };
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &traj).unwrap();
    assert_eq!(read_trajectory(buf.as_slice()).unwrap(), traj);
});
