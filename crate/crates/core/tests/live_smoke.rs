//! Opt-in smoke test against a real chat endpoint. Skipped unless
//! `LADDER_ENDPOINT` is set (with `LADDER_API_KEY` and `LADDER_MODEL` as needed).

use ladder_core::dataset::{generate, GenConfig};
use ladder_core::evalharness::{grade, run, HttpClient, HttpConfig, RunConfig};

#[test]
fn live_endpoint_answers_a_few_questions() {
    if std::env::var(HttpConfig::ENV_ENDPOINT).map_or(true, |e| e.trim().is_empty()) {
        eprintln!("skipping: {} is not set", HttpConfig::ENV_ENDPOINT);
        return;
    }
    let client = HttpClient::new(HttpConfig::from_env(None).unwrap()).unwrap();
    let records = generate(&GenConfig { size: 3, seed: 1, ..GenConfig::default() }).unwrap();
    let transcripts = run(&records, &client, &RunConfig { parallelism: 1, ..RunConfig::default() }).unwrap();
    for t in &transcripts {
        assert!(t.error.is_none(), "{}: {:?}", t.record_id, t.error);
        assert!(t.chain_intact());
    }
    let report = grade(&transcripts, &records).unwrap();
    eprintln!("{}", report.summary_line());
}
