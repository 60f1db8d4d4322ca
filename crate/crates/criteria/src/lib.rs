//! Holds the `acceptance` test target, which runs after every other
//! package's tests because failing criteria stop `cargo test`.
