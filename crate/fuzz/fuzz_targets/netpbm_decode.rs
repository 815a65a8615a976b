#![no_main]

use libfuzzer_sys::fuzz_target;
use securepix::codec::netpbm;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = netpbm::decode(data) {
        let again = netpbm::decode(&netpbm::encode(&d.image, &d.comments))
            .expect("re-encoded image decodes");
        assert_eq!(again.image, d.image);
    }
});
