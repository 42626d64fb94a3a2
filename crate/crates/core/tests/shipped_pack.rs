use std::path::PathBuf;

use lexroad_core::rulepack::{load_rulepack, Rag};

fn pack_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../rulepack")
}

#[test]
fn shipped_pack_loads() {
    let pack = load_rulepack(&pack_dir()).unwrap();
    let ids: Vec<&str> = pack.entries.iter().map(|e| e.rule_id()).collect();
    assert_eq!(
        ids,
        [
            "UK-HC-103/scenario",
            "UK-HC-103",
            "UK-HC-137-138",
            "UK-HC-191-199",
            "UK-HC-99-100/1",
            "UK-HC-99-100/2",
            "UK-HC-99-100/3"
        ]
    );
    let bundles: Vec<String> = pack.bundles().unwrap().into_iter().map(|b| b.id).collect();
    assert_eq!(bundles, ["UK-HC-99-100", "UK-HC-103", "UK-HC-137-138", "UK-HC-191-199"]);
    let groups: Vec<&str> = pack.checklists.iter().map(|c| c.group.as_str()).collect();
    assert_eq!(groups, ["99-100", "103-105", "113", "127-132", "137-138", "191-199", "229"]);
    assert_eq!(pack.checklists.iter().map(|c| c.requirements.len()).sum::<usize>(), 27);
    assert_eq!(pack.profiles.len(), 3);
}

#[test]
fn shipped_ratings() {
    let pack = load_rulepack(&pack_dir()).unwrap();
    for p in &pack.profiles {
        assert_eq!(pack.rate("113", p).unwrap().rating, Rag::Green);
        assert_eq!(pack.rate("99-100", p).unwrap().rating, Rag::Red);
    }
    let mitsubishi = pack.profile("mitsubishi-shogun-sport").unwrap();
    assert_eq!(pack.rate("137-138", mitsubishi).unwrap().rationale, "no applicable evidence");
}
