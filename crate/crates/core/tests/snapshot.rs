use jackratio::jack::jack_in_e;
use jackratio::partition::enumerate;
use jackratio::rational::{int, ratio};
use jackratio::snapshot::{cache_file, load, save, Snapshot, TableEntry, FORMAT, VERSION};
use jackratio::Error;

fn warm() {
    for k in 0..=5 {
        for kappa in enumerate(k, 3) {
            jack_in_e(&kappa, &int(1), 3).unwrap();
            jack_in_e(&kappa, &ratio(3, 7), 3).unwrap();
        }
    }
}

fn entry(snapshot: &Snapshot, partition: &str, beta: &str) -> TableEntry {
    snapshot
        .tables
        .iter()
        .find(|e| e.partition.to_csv() == partition && e.beta == beta && e.m == 3)
        .cloned()
        .unwrap()
}

#[test]
fn round_trip() {
    warm();
    let snapshot = Snapshot::capture();
    assert!(snapshot.tables.len() >= 2 * 16);
    let decoded = Snapshot::decode(snapshot.to_json().as_bytes()).unwrap();
    assert_eq!(decoded, snapshot);
    for entry in &decoded.tables {
        let (kappa, beta, poly) = entry.decode().unwrap();
        assert_eq!(*jack_in_e(&kappa, &beta, entry.m).unwrap(), poly);
    }
    assert!(decoded.install().unwrap() >= 32);
}

#[test]
fn tampering_is_detected() {
    warm();
    let snapshot = Snapshot::capture();
    let good = entry(&snapshot, "2,1", "1");

    let mut leading = good.clone();
    leading.terms.insert("2,1".into(), "1/2".into());
    assert!(matches!(leading.decode(), Err(Error::Snapshot(_))));

    let mut foreign = good.clone();
    foreign.terms.insert("3".into(), "1".into());
    assert!(matches!(foreign.decode(), Err(Error::Snapshot(_))));

    let mut zero = good.clone();
    zero.terms.insert("1,1,1".into(), "0".into());
    assert!(matches!(zero.decode(), Err(Error::Snapshot(_))));

    let mut beta = good.clone();
    beta.beta = "-1".into();
    assert!(beta.decode().is_err());

    let mut garbage = good;
    garbage.terms.insert("1,1,1".into(), "x".into());
    assert!(matches!(garbage.decode(), Err(Error::ParseRational { .. })));
}

#[test]
fn header_is_checked() {
    let wrong_version = format!(r#"{{"format":"{FORMAT}","version":{},"tables":[]}}"#, VERSION + 1);
    assert!(Snapshot::decode(wrong_version.as_bytes()).is_err());
    let wrong_format = format!(r#"{{"format":"other","version":{VERSION},"tables":[]}}"#);
    assert!(Snapshot::decode(wrong_format.as_bytes()).is_err());
    let extra = format!(r#"{{"format":"{FORMAT}","version":{VERSION},"tables":[],"x":1}}"#);
    assert!(Snapshot::decode(extra.as_bytes()).is_err());
    assert!(Snapshot::decode(b"not json").is_err());
    let empty = format!(r#"{{"format":"{FORMAT}","version":{VERSION},"tables":[]}}"#);
    assert_eq!(Snapshot::decode(empty.as_bytes()).unwrap().tables.len(), 0);
}

#[test]
fn save_and_load() {
    warm();
    let dir = std::env::temp_dir().join(format!("jackratio-snapshot-{}", std::process::id()));
    let written = save(&dir).unwrap();
    assert!(written > 0);
    assert!(cache_file(&dir).exists());
    assert_eq!(load(&dir).unwrap(), written);
    let missing = dir.join("nothing-here");
    assert_eq!(load(&missing).unwrap(), 0);
    std::fs::write(cache_file(&dir), b"{}").unwrap();
    assert!(load(&dir).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
