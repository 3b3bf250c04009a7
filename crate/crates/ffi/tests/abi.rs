use std::ffi::{CStr, CString};
use std::fs::File;
use std::path::Path;
use std::ptr;

use commchar::community::CommunityStructure;
use commchar::config::{DescriptorSpec, Kind, PipelineConfig};
use commchar::measures::compute_measure_table;
use commchar::seqdb::build_database;
use commchar::synthetic::{planted_network, PlantedParams, NOISE_ATTRIBUTE, PLANTED_ATTRIBUTE};
use commchar_ffi::*;

fn fixture(dir: &Path) -> CString {
    let params = PlantedParams::default();
    let net = planted_network(&params, 9).unwrap();
    net.write_edges(File::create(dir.join("edges.csv")).unwrap()).unwrap();
    net.write_attributes(File::create(dir.join("attributes.csv")).unwrap()).unwrap();
    let mut config = PipelineConfig::new(params.slices);
    config.input.edges = Some("edges.csv".into());
    config.input.attributes = Some("attributes.csv".into());
    for name in [NOISE_ATTRIBUTE, PLANTED_ATTRIBUTE] {
        config.descriptor.insert(
            name.into(),
            DescriptorSpec {
                kind: Kind::Attribute,
                bins: Some(vec![]),
                labels: Some(vec!["yes".into()]),
                enabled: true,
            },
        );
    }
    let path = dir.join("config.toml");
    std::fs::write(&path, config.to_toml_string().unwrap()).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = commchar_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn pipeline_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    unsafe {
        let mut config = ptr::null_mut();
        assert_eq!(commchar_config_load(path.as_ptr(), &mut config), CommcharStatus::Ok);
        let mut net = ptr::null_mut();
        assert_eq!(commchar_network_load(config, &mut net), CommcharStatus::Ok);
        assert_eq!(commchar_network_node_count(net), 120);
        assert_eq!(commchar_network_slice_count(net), 6);

        let mut report = ptr::null_mut();
        assert_eq!(commchar_characterize(config, net, &mut report), CommcharStatus::Ok);
        assert!(commchar_report_community_count(report) > 0);
        assert!(commchar_report_modularity(report) > 0.3);
        let mut json = ptr::null_mut();
        assert_eq!(commchar_report_json(report, &mut json), CommcharStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("planted=yes"));
        commchar_string_free(json);

        // same inputs give the same report
        let mut again = ptr::null_mut();
        assert_eq!(commchar_characterize(config, net, &mut again), CommcharStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(commchar_report_json(again, &mut json2), CommcharStatus::Ok);
        assert_eq!(CStr::from_ptr(json2).to_str().unwrap(), text);
        commchar_string_free(json2);

        commchar_report_free(again);
        commchar_report_free(report);
        commchar_network_free(net);
        commchar_config_free(config);
    }
}

#[test]
fn mining_returns_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let net = planted_network(&PlantedParams::default(), 3).unwrap();
    let labels: Vec<u8> = net.nodes().map(|v| net.label(v).as_bytes()[1] - b'0').collect();
    let cs = CommunityStructure::from_labels(&labels);
    let table = compute_measure_table(&net, &cs).unwrap();
    let db = build_database(&net, &table, &cs).unwrap();
    let db_path = dir.path().join("db.txt");
    db.write(File::create(&db_path).unwrap()).unwrap();
    let db_path = CString::new(db_path.to_str().unwrap()).unwrap();

    unsafe {
        let mut handle = ptr::null_mut();
        assert_eq!(commchar_database_load(db_path.as_ptr(), &mut handle), CommcharStatus::Ok);
        assert_eq!(commchar_database_len(handle), 120);
        let sup = CString::new("0.5").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(commchar_mine(handle, 0, sup.as_ptr(), true, &mut out), CommcharStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        commchar_string_free(out);
        assert!(text.lines().count() > 0);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["community"], 0);
        }

        let bad = CString::new("1.5").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(commchar_mine(handle, 0, bad.as_ptr(), false, &mut out), CommcharStatus::InvalidSupport);
        assert!(out.is_null());
        assert!(last_error().contains("support"));
        commchar_database_free(handle);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut config = ptr::null_mut();
        assert_eq!(commchar_config_load(ptr::null(), &mut config), CommcharStatus::NullArgument);
        assert!(config.is_null());

        let missing = CString::new("/nonexistent/config.toml").unwrap();
        assert_eq!(commchar_config_load(missing.as_ptr(), &mut config), CommcharStatus::Io);
        assert!(last_error().contains("nonexistent"));

        let bad = CString::new("theta = 2\n[pipeline]\nsurprise = 1").unwrap();
        assert_eq!(commchar_config_parse(bad.as_ptr(), &mut config), CommcharStatus::Config);

        let good = CString::new("theta = 2").unwrap();
        assert_eq!(commchar_config_parse(good.as_ptr(), &mut config), CommcharStatus::Ok);
        assert!(commchar_last_error().is_null());
        let sup = CString::new("0").unwrap();
        assert_eq!(commchar_config_set_min_sup(config, sup.as_ptr()), CommcharStatus::InvalidSupport);
        let sup = CString::new("2/5").unwrap();
        assert_eq!(commchar_config_set_min_sup(config, sup.as_ptr()), CommcharStatus::Ok);
        let mut net = ptr::null_mut();
        assert_eq!(commchar_network_load(config, &mut net), CommcharStatus::Config);
        assert!(net.is_null());
        commchar_config_free(config);

        assert_eq!(commchar_config_parse(good.as_ptr(), ptr::null_mut()), CommcharStatus::NullArgument);
        commchar_config_free(ptr::null_mut());
        commchar_string_free(ptr::null_mut());
        let version = CStr::from_ptr(commchar_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/commchar.h")).unwrap();
    for name in [
        "commchar_config_load",
        "commchar_network_load",
        "commchar_characterize",
        "commchar_report_json",
        "commchar_mine",
        "commchar_string_free",
        "commchar_last_error",
        "COMMCHAR_STATUS_INVALID_SUPPORT",
    ] {
        assert!(header.contains(name), "{name}");
    }
    // compile check when a C compiler is around
    let Ok(cc) = which("cc") else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        "#include \"commchar.h\"\nint main(void) { CommcharConfig *c = 0; return commchar_config_load(\"x\", &c) == COMMCHAR_STATUS_OK; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which(tool: &str) -> Result<std::path::PathBuf, ()> {
    std::env::var_os("PATH")
        .and_then(|paths| std::env::split_paths(&paths).map(|p| p.join(tool)).find(|p| p.is_file()))
        .ok_or(())
}
