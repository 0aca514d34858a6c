//! Holds the `acceptance` test target. The package sorts after `fkdv-core`, so
//! a failing criterion does not stop the core test binaries from running.
