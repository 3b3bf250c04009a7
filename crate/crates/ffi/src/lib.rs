//! C ABI over `commchar`.
//!
//! Every fallible call returns a [`CommcharStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`commchar_last_error`]. Handles are opaque and must be
//! released with the matching `*_free` function; strings returned by the
//! library are released with [`commchar_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use commchar::config::PipelineConfig;
use commchar::mining::{mine_closed, parse_fraction, MiningMode, MiningOptions};
use commchar::network::DynamicAttributedNetwork;
use commchar::pipeline::{load_input, run_on_network, with_thread_pool, write_patterns, Report};
use commchar::seqdb::SequenceDatabase;
use commchar::{CommunityId, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommcharStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    InvalidSupport = 6,
    Consistency = 7,
    Graph = 8,
    Mining = 9,
    Selection = 10,
    Panic = 11,
}

impl From<&Error> for CommcharStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => CommcharStatus::Io,
            Error::Parse { .. } => CommcharStatus::Parse,
            Error::Config(_) => CommcharStatus::Config,
            Error::InvalidSupport(_) => CommcharStatus::InvalidSupport,
            Error::Schema(_) | Error::Consistency(_) | Error::SliceIndex { .. } => CommcharStatus::Consistency,
            Error::EmptyGraph | Error::PartitionMismatch(_) | Error::UnknownNode(_) | Error::UnassignedNode(_) => {
                CommcharStatus::Graph
            }
            Error::EmptyCommunity
            | Error::EmptyComplement
            | Error::CommunityTooSmall { .. }
            | Error::PatternLimit { .. }
            | Error::OracleTooLarge(_) => CommcharStatus::Mining,
            Error::NoPatterns | Error::BothEmpty => CommcharStatus::Selection,
        }
    }
}

/// Parsed pipeline configuration.
pub struct CommcharConfig(PipelineConfig);

/// Loaded dynamic attributed network.
pub struct CommcharNetwork(DynamicAttributedNetwork);

/// Sequence database read from its text form.
pub struct CommcharDatabase(SequenceDatabase);

/// Characterization report of a pipeline run.
pub struct CommcharReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CommcharStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

/// Runs `f`, recording failures and panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CommcharStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CommcharStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CommcharStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CommcharStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CommcharStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(CommcharStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CommcharStatus::NullArgument, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CommcharStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(CommcharStatus::Parse, "output holds a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(CommcharStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn commchar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn commchar_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn commchar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a TOML configuration file. Relative paths inside it resolve
/// against the file's directory.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_config_load(path: *const c_char, out: *mut *mut CommcharConfig) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let config = PipelineConfig::load(text(path, "path")?)?;
        put(out, CommcharConfig(config))
    })
}

/// Parses a TOML configuration held in memory.
///
/// # Safety
/// `toml` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_config_parse(toml: *const c_char, out: *mut *mut CommcharConfig) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let config = PipelineConfig::from_toml_str(text(toml, "toml")?)?;
        put(out, CommcharConfig(config))
    })
}

/// Overrides the minimum support, given as a decimal or a fraction.
///
/// # Safety
/// `config` must be a live handle and `min_sup` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn commchar_config_set_min_sup(config: *mut CommcharConfig, min_sup: *const c_char) -> CommcharStatus {
    guard(|| {
        let config = config
            .as_mut()
            .ok_or_else(|| Failure(CommcharStatus::NullArgument, "config is null".into()))?;
        let value = parse_fraction(text(min_sup, "min_sup")?)?;
        let mut next = config.0.clone();
        next.pipeline.min_sup = commchar::config::MinSupport(value);
        next.validate()?;
        config.0 = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_config_free(config: *mut CommcharConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Loads the network named by the configuration's input section.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_network_load(
    config: *const CommcharConfig,
    out: *mut *mut CommcharNetwork,
) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let net = load_input(&handle(config, "config")?.0)?;
        put(out, CommcharNetwork(net))
    })
}

/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_network_node_count(net: *const CommcharNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.node_count())
}

/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_network_slice_count(net: *const CommcharNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.num_slices())
}

/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_network_free(net: *mut CommcharNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Runs community detection, measures, mining and selection on `net`.
///
/// # Safety
/// `config` and `net` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_characterize(
    config: *const CommcharConfig,
    net: *const CommcharNetwork,
    out: *mut *mut CommcharReport,
) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let config = &handle(config, "config")?.0;
        let net = handle(net, "network")?.0.clone();
        let report = with_thread_pool(config.pipeline.threads, || {
            let output = run_on_network(config, net)?;
            Ok(Report::new(config, &output))
        })?;
        put(out, CommcharReport(report))
    })
}

/// Number of characterized communities.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_report_community_count(report: *const CommcharReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.characterizations.len())
}

/// Modularity of the detected partition.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_report_modularity(report: *const CommcharReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.communities.modularity)
}

/// Report as pretty JSON; free with [`commchar_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_report_json(report: *const CommcharReport, out: *mut *mut c_char) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let json = handle(report, "report")?.0.to_json()?;
        put_string(out, json)
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_report_free(report: *mut CommcharReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Reads a sequence database file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_database_load(path: *const c_char, out: *mut *mut CommcharDatabase) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let db = SequenceDatabase::load(text(path, "path")?)?;
        put(out, CommcharDatabase(db))
    })
}

/// # Safety
/// `db` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_database_len(db: *const CommcharDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `db` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn commchar_database_free(db: *mut CommcharDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Mines the closed (or maximal) patterns of one community and returns them
/// as JSON lines; free with [`commchar_string_free`].
///
/// # Safety
/// `db` must be a live handle, `min_sup` a nul-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn commchar_mine(
    db: *const CommcharDatabase,
    community: u32,
    min_sup: *const c_char,
    maximal: bool,
    out: *mut *mut c_char,
) -> CommcharStatus {
    guard(|| {
        check_out(out)?;
        let db = &handle(db, "database")?.0;
        let mut options = MiningOptions::with_min_sup(parse_fraction(text(min_sup, "min_sup")?)?);
        if maximal {
            options.mode = MiningMode::Maximal;
        }
        options.validate()?;
        let patterns = mine_closed(db, CommunityId(community), &options)?;
        let mut buf = Vec::new();
        write_patterns(&mut buf, db, &patterns)?;
        let s = String::from_utf8(buf).map_err(|_| Failure(CommcharStatus::Parse, "non UTF-8 output".into()))?;
        put_string(out, s)
    })
}
