#![no_main]

use libfuzzer_sys::fuzz_target;
use securepix::codec::KeyFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(key) = KeyFile::parse(text) {
        assert_eq!(
            KeyFile::parse(&key.serialize()).expect("serialized key parses"),
            key
        );
    }
});
