use tvsr::datagen::{
    dataset_digest, generate_dataset, invalid_counterparts, read_dataset, write_dataset, Bin, DatasetSpec,
};

fn small_spec(seed: u64) -> DatasetSpec {
    DatasetSpec {
        bins: vec![Bin::new(0.1, 0.15).unwrap(), Bin::new(0.25, 0.3).unwrap()],
        per_bin: 3,
        max_lines: 6,
        ..DatasetSpec::paper(3, seed)
    }
}

#[test]
fn generation_is_deterministic_and_binned() {
    let spec = small_spec(7);
    let a = generate_dataset(&spec).unwrap();
    let b = generate_dataset(&spec).unwrap();
    assert_eq!(a.len(), 6);
    assert_eq!(dataset_digest(&a), dataset_digest(&b));
    assert_ne!(dataset_digest(&a), dataset_digest(&generate_dataset(&small_spec(8)).unwrap()));
    for inst in &a {
        let bin = spec.bins[inst.bin];
        let d = inst.block.delta();
        assert!(d >= bin.lo - 1e-12 && d <= bin.hi + 1e-12, "{d}");
        assert!(inst.block.check_assumption_1().holds);
    }
}

#[test]
fn invalid_counterparts_violate_the_assumption() {
    let valid = generate_dataset(&small_spec(3)).unwrap();
    let invalid = invalid_counterparts(&valid, 3);
    assert_eq!(invalid.len(), valid.len());
    for (v, i) in valid.iter().zip(&invalid) {
        if let Some(i) = i {
            assert_eq!((i.bin, i.index), (v.bin, v.index));
            assert_eq!(i.block.x_indices(), v.block.x_indices());
            assert!(!i.block.check_assumption_1().holds);
        }
    }
}

#[test]
fn dataset_roundtrips_through_files() {
    let data = generate_dataset(&small_spec(11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &data).unwrap();
    let back = read_dataset(dir.path()).unwrap();
    assert_eq!(dataset_digest(&back), dataset_digest(&data));
    assert_eq!(back.len(), data.len());
}
