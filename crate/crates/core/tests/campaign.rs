use std::fs;

use linrec::campaign::*;
use linrec::chain::{derive_chain, finiteness_bound, BoundChain, ProblemInstance};
use linrec::par;
use linrec::reduction::Method;
use rug::Integer;

fn setup(k: usize) -> (ProblemInstance, BoundChain, Integer) {
    let inst = ProblemInstance::zeckendorf_binary(k, 1).unwrap();
    let chain = derive_chain(&inst).unwrap();
    let n = finiteness_bound(&chain).unwrap().n1_bound.hi().to_integer().unwrap();
    (inst, chain, n)
}

#[test]
fn two_fibonacci_campaign_and_resume() {
    let (inst, chain, n) = setup(2);
    let full = run_campaign(&inst, &chain, &n, &CampaignPolicy::default()).unwrap();
    assert!(!full.conditional());
    assert!(full.final_n1 < 300, "{}", full.report());
    assert_eq!(full.levels[0].pairs[0].pair, (2, 2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt");
    let policy = CampaignPolicy { checkpoint: Some(path.clone()), batch_size: 40, stop_after_cells: Some(100), ..Default::default() };
    match run_campaign(&inst, &chain, &n, &policy) {
        Err(CampaignError::Interrupted(done)) => assert!(done >= 100),
        other => panic!("expected interruption, got {other:?}"),
    }
    let resume = CampaignPolicy { stop_after_cells: None, ..policy.clone() };
    let resumed = run_campaign(&inst, &chain, &n, &resume).unwrap();
    assert!(resumed.cells_reused >= 100);
    assert_eq!(resumed.trace, full.trace);
    assert_eq!(resumed.final_n1, full.final_n1);
    assert_eq!(resumed.levels, full.levels);

    let replay = run_campaign(&inst, &chain, &n, &resume).unwrap();
    assert!(replay.replayed);
    assert_eq!(replay.cells_computed, resumed.cells_computed);
    assert_eq!(replay.final_n1, full.final_n1);

    let changed = CampaignPolicy { precision_ceiling: 1 << 13, ..resume.clone() };
    assert!(matches!(run_campaign(&inst, &chain, &n, &changed), Err(CampaignError::PolicyMismatch { .. })));

    fs::remove_file(path.join("final.json")).unwrap();
    let seg = path.join("seg-000001.jsonl");
    let text = fs::read_to_string(&seg).unwrap().replacen("\"bound\":", "\"bound\":1", 1);
    fs::write(&seg, text).unwrap();
    assert!(matches!(run_campaign(&inst, &chain, &n, &resume), Err(CampaignError::CorruptCheckpoint(_))));
}

#[test]
fn small_start_short_circuits() {
    let (inst, chain, _) = setup(2);
    let r = run_campaign(&inst, &chain, &Integer::from(10), &CampaignPolicy::default()).unwrap();
    assert!(r.short_circuit);
    assert!(r.levels.is_empty());
    assert!(r.final_bound() <= ENUMERATION_THRESHOLD);
}

#[test]
fn jobs_do_not_change_outcomes() {
    let (inst, chain, n) = setup(4);
    let ctx = CellContext::new(&inst, &chain, &n, &CampaignPolicy::default()).unwrap();
    let state = PairState { pair: (4, 2), n_caps: vec![319, 330], m_caps: vec![] };
    let cells: Vec<CellId> = cells_of(&state, 2, 1).step_by(50).take(1000).collect();
    assert_eq!(cells.len(), 1000);
    let one = par::with_jobs(1, || par::map(&cells, |c| ctx.reduce_cell(c)));
    let many = par::with_jobs(4, || par::map(&cells, |c| ctx.reduce_cell(c)));
    assert_eq!(one, many);
    assert!(one.iter().all(|o| o.method != Method::Failed));
}

#[test]
fn dependent_cells_use_legendre() {
    let (inst, chain, n) = setup(4);
    let ctx = CellContext::new(&inst, &chain, &n, &CampaignPolicy::default()).unwrap();
    for gaps in [vec![2], vec![6]] {
        let id = CellId { pair: (3, 2), n_gaps: gaps, m_gaps: vec![] };
        let o = ctx.reduce_cell(&id);
        assert_eq!(o.method, Method::Legendre, "{o:?}");
        assert!(o.bound < 340);
    }
    let id = CellId { pair: (5, 2), n_gaps: vec![3, 6, 9], m_gaps: vec![] };
    let o = ctx.reduce_cell(&id);
    assert_eq!(o.method, Method::Legendre, "{o:?}");
    assert!(o.bound <= 364);
}
