//! Affiliation-threshold filtering and seeded stratified sampling of the
//! evaluation set.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Dimension, SpeechRecord};

/// Drops every record whose party has fewer than `threshold` speeches in the
/// input. Stable-ordered, idempotent, monotone in `threshold`.
pub fn filter_min_affiliation(records: Vec<SpeechRecord>, threshold: usize) -> Vec<SpeechRecord> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(r.party.as_str()).or_default() += 1;
    }
    let keep: Vec<bool> = records
        .iter()
        .map(|r| counts[r.party.as_str()] >= threshold)
        .collect();
    records
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Instruction template used when a sampled record gets a generic prompt.
/// `{SECTION}` and `{TOPIC}` are substituted from the record.
pub const DEFAULT_GENERIC_TEMPLATE: &str = "Address the debate on {SECTION} on {TOPIC}.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptSource {
    /// Generic instruction rendered from the template.
    Generic,
    /// The record's own parliamentary question, verbatim.
    Specific,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledRecord {
    pub record: SpeechRecord,
    pub instruction: String,
    pub prompt_source: PromptSource,
}

#[derive(Debug, Clone, Serialize)]
pub struct StratifiedSample {
    pub records: Vec<SampledRecord>,
    pub per_stratum: BTreeMap<String, usize>,
    pub generic_count: usize,
    pub specific_count: usize,
    /// Specific-prompt slots that had to fall back to generic because too few
    /// sampled records carry a parliamentary question.
    pub specific_shortfall: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("requested sample of {requested} exceeds population {population}")]
    SampleTooLarge { requested: usize, population: usize },
    #[error("prompt_mix must lie in [0, 1], got {0}")]
    BadPromptMix(f64),
    #[error("strata list must not be empty")]
    NoStrata,
}

fn stratum_key(record: &SpeechRecord, strata: &[Dimension]) -> String {
    strata
        .iter()
        .map(|d| record.context_value(*d))
        .collect::<Vec<_>>()
        .join("\u{1f}")
}

/// Seeded stratified sample of `n` records.
///
/// Per-stratum allocation follows largest-remainder quotas, so every stratum
/// count sits within one item of exact proportionality. A `prompt_mix`
/// fraction of the sample receives the generic instruction; the rest keep
/// their own parliamentary question (records without one fall back to
/// generic and are counted in `specific_shortfall`). Identical seeds give
/// bit-identical output.
pub fn stratified_sample(
    records: &[SpeechRecord],
    n: usize,
    strata: &[Dimension],
    prompt_mix: f64,
    generic_template: &str,
    seed: u64,
) -> Result<StratifiedSample, SampleError> {
    if !(0.0..=1.0).contains(&prompt_mix) || !prompt_mix.is_finite() {
        return Err(SampleError::BadPromptMix(prompt_mix));
    }
    if strata.is_empty() {
        return Err(SampleError::NoStrata);
    }
    if n > records.len() {
        return Err(SampleError::SampleTooLarge {
            requested: n,
            population: records.len(),
        });
    }

    // Group indices per stratum; BTreeMap keeps iteration deterministic.
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(stratum_key(r, strata)).or_default().push(i);
    }

    // Largest-remainder allocation of n across strata.
    let population = records.len() as f64;
    let mut base_total = 0usize;
    let mut quotas: Vec<(String, usize, f64)> = Vec::with_capacity(groups.len());
    for (key, members) in &groups {
        let exact = n as f64 * members.len() as f64 / population;
        let base = exact.floor() as usize;
        base_total += base;
        quotas.push((key.clone(), base, exact - base as f64));
    }
    let mut leftover = n - base_total;
    // Highest remainder first; key order breaks ties deterministically.
    quotas.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then_with(|| a.0.cmp(&b.0)));
    let mut allocation: BTreeMap<String, usize> = BTreeMap::new();
    for (key, base, _) in &quotas {
        let extra = if leftover > 0 { 1 } else { 0 };
        if extra == 1 {
            leftover -= 1;
        }
        allocation.insert(key.clone(), base + extra);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut per_stratum = BTreeMap::new();
    for (key, members) in &groups {
        let take = allocation[key].min(members.len());
        if take == 0 {
            continue;
        }
        let mut pool = members.clone();
        pool.shuffle(&mut rng);
        chosen.extend(pool.into_iter().take(take));
        per_stratum.insert(key.clone(), take);
    }
    chosen.sort_unstable();

    // Prompt-mix assignment: round(prompt_mix * n) generic slots; specific
    // slots are drawn (seeded) from the chosen records that carry a prompt.
    let generic_target = (prompt_mix * n as f64).round() as usize;
    let specific_target = n - generic_target.min(n);
    let mut with_prompts: Vec<usize> = (0..chosen.len())
        .filter(|&pos| records[chosen[pos]].prompts.is_some())
        .collect();
    with_prompts.shuffle(&mut rng);
    let specific_take = specific_target.min(with_prompts.len());
    let specific_shortfall = specific_target - specific_take;
    let mut is_specific = vec![false; chosen.len()];
    for &pos in with_prompts.iter().take(specific_take) {
        is_specific[pos] = true;
    }

    let mut sampled = Vec::with_capacity(chosen.len());
    let mut generic_count = 0;
    let mut specific_count = 0;
    for (pos, &idx) in chosen.iter().enumerate() {
        let record = records[idx].clone();
        let (instruction, prompt_source) = if is_specific[pos] {
            specific_count += 1;
            (
                record.prompts.clone().expect("specific slots carry prompts"),
                PromptSource::Specific,
            )
        } else {
            generic_count += 1;
            (
                generic_template
                    .replace("{SECTION}", &record.section)
                    .replace("{TOPIC}", &record.topic),
                PromptSource::Generic,
            )
        };
        sampled.push(SampledRecord {
            record,
            instruction,
            prompt_source,
        });
    }

    Ok(StratifiedSample {
        records: sampled,
        per_stratum,
        generic_count,
        specific_count,
        specific_shortfall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::House;

    fn record(party: &str, topic: &str, with_prompt: bool) -> SpeechRecord {
        SpeechRecord {
            party: party.into(),
            topic: topic.into(),
            orientation: "Centre".into(),
            section: format!("{topic} Affairs"),
            house: House::Commons,
            speech: format!("A speech about {topic} for {party}."),
            prompts: with_prompt.then(|| format!("What about {topic}?")),
        }
    }

    #[test]
    fn zero_threshold_is_identity() {
        let records: Vec<_> = (0..5).map(|i| record(&format!("P{i}"), "T", true)).collect();
        assert_eq!(filter_min_affiliation(records.clone(), 0), records);
    }

    #[test]
    fn threshold_drops_small_parties_stably() {
        // Hand count: A has 3 records, B has 1; threshold 2 keeps only A.
        let records = vec![
            record("A", "T1", true),
            record("B", "T1", true),
            record("A", "T2", true),
            record("A", "T3", true),
        ];
        let kept = filter_min_affiliation(records, 2);
        assert_eq!(kept.len(), 3);
        assert!(kept.iter().all(|r| r.party == "A"));
        assert_eq!(kept[0].topic, "T1");
        assert_eq!(kept[1].topic, "T2");
    }

    #[test]
    fn filter_is_idempotent_and_monotone() {
        let records: Vec<_> = (0..20)
            .map(|i| record(&format!("P{}", i % 4), "T", false))
            .collect();
        let once = filter_min_affiliation(records.clone(), 5);
        let twice = filter_min_affiliation(once.clone(), 5);
        assert_eq!(once, twice);
        for t in 0..8 {
            let low = filter_min_affiliation(records.clone(), t);
            let high = filter_min_affiliation(records.clone(), t + 1);
            assert!(high.len() <= low.len());
            assert!(high.iter().all(|r| low.contains(r)));
        }
    }

    #[test]
    fn exhaustive_sample_is_a_permutation() {
        let records: Vec<_> = (0..12)
            .map(|i| record(&format!("P{}", i % 3), &format!("T{}", i % 2), true))
            .collect();
        let sample = stratified_sample(
            &records,
            records.len(),
            &[Dimension::Party],
            0.5,
            DEFAULT_GENERIC_TEMPLATE,
            7,
        )
        .unwrap();
        assert_eq!(sample.records.len(), records.len());
        let mut got: Vec<_> = sample.records.iter().map(|s| s.record.clone()).collect();
        let mut want = records.clone();
        got.sort_by(|a, b| a.speech.cmp(&b.speech));
        want.sort_by(|a, b| a.speech.cmp(&b.speech));
        assert_eq!(got, want);
    }

    #[test]
    fn proportional_allocation_80_20() {
        // Population 80/20 across two parties, n=10 -> 8/2 by hand.
        let mut records = Vec::new();
        for i in 0..80 {
            records.push(record("Big", &format!("T{i}"), true));
        }
        for i in 0..20 {
            records.push(record("Small", &format!("T{i}"), true));
        }
        let sample =
            stratified_sample(&records, 10, &[Dimension::Party], 0.0, DEFAULT_GENERIC_TEMPLATE, 3)
                .unwrap();
        assert_eq!(sample.per_stratum["Big"], 8);
        assert_eq!(sample.per_stratum["Small"], 2);
    }

    #[test]
    fn prompt_mix_point_nine_gives_exactly_ninety_generic() {
        let records: Vec<_> = (0..200)
            .map(|i| record(&format!("P{}", i % 2), &format!("T{}", i % 5), true))
            .collect();
        let sample = stratified_sample(
            &records,
            100,
            &[Dimension::Party, Dimension::Topic],
            0.9,
            DEFAULT_GENERIC_TEMPLATE,
            11,
        )
        .unwrap();
        assert_eq!(sample.generic_count, 90);
        assert_eq!(sample.specific_count, 10);
        assert_eq!(sample.specific_shortfall, 0);
        for s in &sample.records {
            match s.prompt_source {
                PromptSource::Generic => {
                    assert_eq!(
                        s.instruction,
                        format!(
                            "Address the debate on {} on {}.",
                            s.record.section, s.record.topic
                        )
                    );
                }
                PromptSource::Specific => {
                    assert_eq!(Some(s.instruction.as_str()), s.record.prompts.as_deref());
                }
            }
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let records: Vec<_> = (0..60)
            .map(|i| record(&format!("P{}", i % 3), &format!("T{}", i % 4), i % 2 == 0))
            .collect();
        let a = stratified_sample(&records, 30, &[Dimension::Party], 0.8, DEFAULT_GENERIC_TEMPLATE, 42)
            .unwrap();
        let b = stratified_sample(&records, 30, &[Dimension::Party], 0.8, DEFAULT_GENERIC_TEMPLATE, 42)
            .unwrap();
        assert_eq!(a.records, b.records);
        let c = stratified_sample(&records, 30, &[Dimension::Party], 0.8, DEFAULT_GENERIC_TEMPLATE, 43)
            .unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn per_stratum_counts_within_one_of_exact_proportion() {
        let records: Vec<_> = (0..97)
            .map(|i| record(&format!("P{}", i % 5), "T", true))
            .collect();
        let n = 31;
        let sample =
            stratified_sample(&records, n, &[Dimension::Party], 0.0, DEFAULT_GENERIC_TEMPLATE, 9)
                .unwrap();
        let mut pop: BTreeMap<String, usize> = BTreeMap::new();
        for r in &records {
            *pop.entry(r.party.clone()).or_default() += 1;
        }
        for (key, &count) in &sample.per_stratum {
            let exact = n as f64 * pop[key] as f64 / records.len() as f64;
            assert!((count as f64 - exact).abs() <= 1.0, "{key}: {count} vs {exact}");
        }
        let total: usize = sample.per_stratum.values().sum();
        assert_eq!(total, n);
    }

    #[test]
    fn oversized_sample_errors() {
        let records = vec![record("A", "T", true)];
        assert_eq!(
            stratified_sample(&records, 2, &[Dimension::Party], 0.5, DEFAULT_GENERIC_TEMPLATE, 1),
            Err(SampleError::SampleTooLarge {
                requested: 2,
                population: 1
            })
        );
    }

    #[test]
    fn specific_shortfall_falls_back_to_generic() {
        // No record carries a prompt, so all specific slots fall back.
        let records: Vec<_> = (0..10).map(|i| record("A", &format!("T{i}"), false)).collect();
        let sample =
            stratified_sample(&records, 10, &[Dimension::Party], 0.5, DEFAULT_GENERIC_TEMPLATE, 2)
                .unwrap();
        assert_eq!(sample.generic_count, 10);
        assert_eq!(sample.specific_count, 0);
        assert_eq!(sample.specific_shortfall, 5);
    }
}
