//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p hnmt --test acceptance -- --nocapture`.

mod common;

use std::collections::HashMap;
use std::time::Instant;

use common::*;
use hnmt::decoding::{
    average_distributions, beam_search, exhaustive_search, fb_rerank, read_nbest, rerank_corpus,
    write_nbest, EnsembleDecoder, NBestList, PenaltyConfig, Provenance, ScoredHypothesis, StepModel,
};
use hnmt::metrics::{bleu, chrf3, ter, metric_tokenize, MetricDetail};
use hnmt::model::{
    average_parameters, load_checkpoint, save_checkpoint, train, Direction, ModelConfig,
    ParallelCorpus, Savepoint, TranslationModel, VocabLevel, Vocabulary,
};
use hnmt::nn::{AttentionModule, ContextGate, LstmCell, LstmVariant};
use hnmt::pipeline::{backtranslate, mix, DataMix, MixRegime};
use hnmt::segmentation::{
    bpe_join, detokenize, hyphen_retokenize, hyphen_variants, tokenize, BpeModel,
};
use hnmt::tensor::{grad_check, Parameters, Tape, Tensor};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------
// Criterion 1: gradient suite
// ---------------------------------------------------------------------

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Tensor<f64> {
    Tensor::row((0..n).map(|_| rng.random_range(-0.8..0.8)).collect())
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Tensor<f64> {
    Tensor::from_vec(vec![m, n], (0..m * n).map(|_| rng.random_range(-0.8..0.8)).collect()).unwrap()
}

/// Readout: scalar = out . r, with r a fixed non-degenerate direction.
fn readout(tape: &mut Tape<f64>, out: hnmt::tensor::NodeId, r: &Tensor<f64>) -> hnmt::tensor::NodeId {
    let rn = tape.input(r.clone());
    tape.matmul(out, rn).expect("readout product")
}

fn check_lstm(seed: u64, variant: LstmVariant) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Parameters::<f64>::new();
    let cell = LstmCell::init("cell", &mut params, &mut rng, 3, 4, variant).unwrap();
    params.register("in.x", random_row(&mut rng, 3)).unwrap();
    params.register("in.h", random_row(&mut rng, 4)).unwrap();
    params.register("in.c", random_row(&mut rng, 4)).unwrap();
    let r = random_matrix(&mut rng, 8, 1);
    let report = grad_check(&mut params, 1e-3, |p, tape| {
        let x = tape.param(p.by_name("in.x").unwrap());
        let h = tape.param(p.by_name("in.h").unwrap());
        let c = tape.param(p.by_name("in.c").unwrap());
        let (h2, c2) = cell.step(tape, p, x, h, c, None)?;
        let out = tape.concat(&[h2, c2], 1)?;
        Ok(readout(tape, out, &r))
    })
    .unwrap();
    report.max_rel_err
}

fn check_attention(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Parameters::<f64>::new();
    let att = AttentionModule::init("att", &mut params, &mut rng, 3, 2, 3).unwrap();
    params.register("in.state", random_row(&mut rng, 2)).unwrap();
    params.register("in.ann", random_matrix(&mut rng, 2, 3)).unwrap();
    let r1 = random_matrix(&mut rng, 3, 1);
    let r2 = random_matrix(&mut rng, 2, 1);
    let report = grad_check(&mut params, 1e-3, |p, tape| {
        let s = tape.param(p.by_name("in.state").unwrap());
        let ann = tape.param(p.by_name("in.ann").unwrap());
        let (ctx, weights) = att.attend(tape, p, s, ann)?;
        let a = readout(tape, ctx, &r1);
        let wt = tape.transpose(weights);
        let b = readout(tape, wt, &r2);
        tape.add(a, b)
    })
    .unwrap();
    report.max_rel_err
}

fn check_context_gate(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Parameters::<f64>::new();
    let gate = ContextGate::init("gate", &mut params, &mut rng, 2, 2, 3, 3).unwrap();
    params.register("in.state", random_row(&mut rng, 2)).unwrap();
    params.register("in.symbol", random_row(&mut rng, 2)).unwrap();
    params.register("in.context", random_row(&mut rng, 3)).unwrap();
    params.register("in.src", random_row(&mut rng, 3)).unwrap();
    params.register("in.tgt", random_row(&mut rng, 3)).unwrap();
    let r = random_matrix(&mut rng, 3, 1);
    let report = grad_check(&mut params, 1e-3, |p, tape| {
        let s = tape.param(p.by_name("in.state").unwrap());
        let y = tape.param(p.by_name("in.symbol").unwrap());
        let c = tape.param(p.by_name("in.context").unwrap());
        let src = tape.param(p.by_name("in.src").unwrap());
        let tgt = tape.param(p.by_name("in.tgt").unwrap());
        let (gs, gt) = gate.apply(tape, p, s, y, c, src, tgt)?;
        let sum = tape.add(gs, gt)?;
        Ok(readout(tape, sum, &r))
    })
    .unwrap();
    report.max_rel_err
}

fn acceptance_model_f64(seed: u64) -> TranslationModel<f64> {
    let config = ModelConfig {
        word_embed_dim: 6,
        char_embed_dim: 4,
        encoder_state_dim: 5,
        decoder_state_dim: 7,
        attention_dim: 4,
        decoder_level: VocabLevel::Word,
        ..ModelConfig::default()
    };
    let source_vocab = Vocabulary::build(VocabLevel::Word, ["a", "b"], None);
    let char_vocab = Vocabulary::build(VocabLevel::Char, ["a", "b"], None);
    let target_vocab = Vocabulary::build(VocabLevel::Word, ["a", "b"], None);
    TranslationModel::new(config, source_vocab, char_vocab, target_vocab, seed).unwrap()
}

fn check_char_path(seed: u64) -> f64 {
    let mut model = acceptance_model_f64(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let r = random_matrix(&mut rng, 6, 1);
    // "ba" is outside the word vocabulary, so it embeds through the
    // character LSTM; its characters are in the char vocabulary.
    let tokens = vec!["ba".to_string()];
    let report = grad_check(&mut model, 1e-3, |m, tape| {
        let (embs, chars_used) = m.embed_source_tokens(tape, &tokens, None)?;
        assert_eq!(chars_used, 1);
        Ok(readout(tape, embs[0], &r))
    })
    .unwrap();
    report.max_rel_err
}

fn check_full_decoder_step(seed: u64) -> f64 {
    let mut model = acceptance_model_f64(seed);
    let batch = vec![(
        vec!["a".to_string(), "ba".to_string(), "b".to_string()],
        model.encode_target_line("b a"),
    )];
    let report = grad_check(&mut model, 1e-3, |m, tape| {
        let (loss, _) = m.build_batch_loss(tape, &batch, None)?;
        Ok(loss)
    })
    .unwrap();
    report.max_rel_err
}

#[test]
fn criterion_01_gradient_suite() {
    let started = Instant::now();
    let mut worst = (0.0f64, "none");
    let mut track = |err: f64, layer: &'static str| {
        if err > worst.0 {
            worst = (err, layer);
        }
    };
    for seed in 0..20u64 {
        track(check_lstm(seed, LstmVariant::Plain), "plain lstm");
        track(check_lstm(seed, LstmVariant::LayerNorm), "layer-norm lstm");
        track(check_attention(seed), "attention");
        track(check_context_gate(seed), "context gate");
        track(check_char_path(seed), "char path");
        track(check_full_decoder_step(seed), "full decoder step");
    }
    let elapsed = started.elapsed();
    assert!(
        worst.0 <= 1e-3,
        "worst relative error {} in {} exceeds 1e-3",
        worst.0,
        worst.1
    );
    assert!(elapsed.as_secs() < 60, "gradient suite took {elapsed:?}, budget 60 s");
    println!(
        "[PASS] criterion 1: gradient suite over 20 seeds, worst rel err {:.3e} ({}), {elapsed:?}",
        worst.0, worst.1
    );
}

// ---------------------------------------------------------------------
// Criterion 2: copy-task convergence
// ---------------------------------------------------------------------

#[test]
fn criterion_02_copy_task_convergence() {
    let started = Instant::now();
    let train_corpus = copy_corpus(2000, 20, 10, 100);
    let heldout = copy_corpus(200, 20, 10, 999);

    let mut accuracies = Vec::new();
    for (direction, seed) in [(Direction::Forward, 1u64), (Direction::Backward, 2u64)] {
        let mut model = copy_task_model(&train_corpus, direction, seed);
        train(&mut model, &train_corpus, None, &copy_train_config(seed, 3000)).unwrap();
        let accuracy = token_accuracy(&model, &heldout);
        accuracies.push((direction, accuracy));
    }
    let elapsed = started.elapsed();
    for (direction, accuracy) in &accuracies {
        assert!(
            *accuracy >= 0.99,
            "{direction} model reached only {accuracy:.4} token accuracy"
        );
    }
    assert!(elapsed.as_secs() < 600, "copy task took {elapsed:?}, budget is 10 minutes");
    println!(
        "[PASS] criterion 2: copy-task convergence, forward {:.4} / backward {:.4}, {elapsed:?}",
        accuracies[0].1, accuracies[1].1
    );
}

// ---------------------------------------------------------------------
// Criterion 3: full-width beam equals exhaustive search
// ---------------------------------------------------------------------

#[test]
fn criterion_03_oracle_decoding() {
    for seed in 0..20u64 {
        let vocab = 3 + (seed as usize % 3); // 3..=5 including EOS
        let model = HashToyModel { vocab, seed, src_len: 3 };
        let penalties = if seed % 2 == 0 {
            PenaltyConfig::default()
        } else {
            PenaltyConfig::new(0.7, 0.25, 0.15).unwrap()
        };
        let max_len = 4;
        let beam =
            beam_search(&model, 5usize.pow(4), max_len, &penalties, 5, 0, &render_ids).unwrap();
        let (oracle, _) = exhaustive_search(&model, max_len, &penalties, 0, &render_ids).unwrap();
        let b = beam.best().unwrap();
        let o = oracle.best().unwrap();
        assert_eq!(b.symbols, o.symbols, "seed {seed}: argmax sequences differ");
        assert_eq!(b.score.to_bits(), o.score.to_bits(), "seed {seed}: scores differ");
    }
    println!("[PASS] criterion 3: full-width beam equals exhaustive search on 20 toy models");
}

// ---------------------------------------------------------------------
// Criterion 4: ensembling algebra
// ---------------------------------------------------------------------

struct OneHotModel {
    target: usize,
    vocab: usize,
}

impl StepModel for OneHotModel {
    type State = ();
    fn start(&self) {}
    fn vocab_size(&self) -> usize {
        self.vocab
    }
    fn eos_id(&self) -> u32 {
        0
    }
    fn step(&self, _: &(), _: Option<u32>) -> (Vec<f64>, Vec<f64>, ()) {
        let mut p = vec![0.0; self.vocab];
        p[self.target] = 1.0;
        (p, vec![1.0], ())
    }
}

#[test]
fn criterion_04_ensembling_algebra() {
    // Ensemble of M identical models matches the single model within 1e-6.
    let corpus = copy_corpus(40, 8, 5, 5);
    let mut model = copy_task_model(&corpus, Direction::Forward, 9);
    train(&mut model, &corpus, None, &copy_train_config(9, 30)).unwrap();
    let src: Vec<String> = corpus.pairs[0].0.clone();
    for m in [2usize, 4] {
        let decoders: Vec<_> = (0..m).map(|_| model.decoder(&src).unwrap()).collect();
        let ensemble = EnsembleDecoder::new(decoders).unwrap();
        let single = model.decoder(&src).unwrap();
        let (pe, _, _) = ensemble.step(&ensemble.start(), None);
        let (ps, _, _) = single.step(&single.start(), None);
        for (a, b) in pe.iter().zip(&ps) {
            assert!((a - b).abs() <= 1e-6, "M={m}: {a} vs {b}");
        }
        let sum: f64 = pe.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-6);
    }

    // Parameter average of one savepoint is bitwise identity.
    let sp = Savepoint::from_model(&model, "m", 0, None);
    let avg = average_parameters(std::slice::from_ref(&sp)).unwrap();
    for (a, b) in avg.params.iter().zip(sp.params.iter()) {
        assert_eq!(a.name(), b.name());
        for (x, y) in a.value().data().iter().zip(b.value().data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    // Two deterministic one-hot models average to 0.5/0.5.
    let ens = EnsembleDecoder::new(vec![
        OneHotModel { target: 1, vocab: 4 },
        OneHotModel { target: 2, vocab: 4 },
    ])
    .unwrap();
    let (p, _, _) = ens.step(&ens.start(), None);
    assert_eq!(p, vec![0.0, 0.5, 0.5, 0.0]);

    // Distribution averaging is permutation invariant (up to f64 addition
    // order, far inside the 1e-6 contract).
    let dists = vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8]];
    let rev: Vec<Vec<f64>> = dists.iter().rev().cloned().collect();
    for (a, b) in average_distributions(&dists)
        .unwrap()
        .iter()
        .zip(average_distributions(&rev).unwrap().iter())
    {
        assert!((a - b).abs() <= 1e-12);
    }

    println!("[PASS] criterion 4: ensembling algebra (identity, averaging, one-hot mixture)");
}

// ---------------------------------------------------------------------
// Criterion 5: two-model ensemble beats the best single model (trend)
// ---------------------------------------------------------------------

#[test]
fn criterion_05_ensemble_trend() {
    let started = Instant::now();
    let mut wins = 0;
    let reps = 10;
    for rep in 0..reps {
        let train_corpus = copy_corpus(400, 12, 6, 7000 + rep);
        let dev = copy_corpus(120, 12, 6, 8000 + rep);
        let mut models = Vec::new();
        for k in 0..2u64 {
            let seed = 100 * rep + 10 * k + 3;
            let mut model = copy_task_model(&train_corpus, Direction::Forward, seed);
            train(&mut model, &train_corpus, None, &copy_train_config(seed, 220)).unwrap();
            models.push(model);
        }
        let ce_a = ensemble_cross_entropy(&[&models[0]], &dev);
        let ce_b = ensemble_cross_entropy(&[&models[1]], &dev);
        let ce_ens = ensemble_cross_entropy(&[&models[0], &models[1]], &dev);
        let best_single = ce_a.min(ce_b);
        if ce_ens <= best_single {
            wins += 1;
        }
        println!(
            "  rep {rep}: singles {ce_a:.4}/{ce_b:.4}, ensemble {ce_ens:.4} ({})",
            if ce_ens <= best_single { "win" } else { "loss" }
        );
    }
    assert!(wins >= 8, "ensemble won only {wins}/{reps} repetitions");
    println!(
        "[PASS] criterion 5: 2-model ensemble <= best single in {wins}/{reps} repetitions, {:?}",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------
// Criterion 6: Balanced backtranslation mix beats parallel-only (trend)
// ---------------------------------------------------------------------

#[test]
fn criterion_06_data_mix_trend() {
    let started = Instant::now();
    let mut wins = 0;
    let reps = 10;
    for rep in 0..reps {
        let parallel = copy_corpus(150, 12, 6, 20_000 + rep);
        let dev = copy_corpus(100, 12, 6, 21_000 + rep);
        let mono: Vec<String> =
            copy_corpus(150, 12, 6, 22_000 + rep).pairs.into_iter().map(|(_, t)| t).collect();

        // Reverse model (target -> source; identical sides on a copy task).
        let mut reverse = copy_task_model(&parallel, Direction::Forward, 500 + rep);
        train(&mut reverse, &parallel, None, &copy_train_config(500 + rep, 600)).unwrap();
        let (synthetic, report) = backtranslate(&reverse, &mono, "reverse").unwrap();
        assert_eq!(report.translated, mono.len());

        let parallel_pairs: Vec<(String, String)> = parallel
            .pairs
            .iter()
            .map(|(src, trg)| (src.join(" "), trg.clone()))
            .collect();
        let mut ce = HashMap::new();
        for regime in [MixRegime::None, MixRegime::Balanced] {
            let data = DataMix {
                regime,
                parallel: parallel_pairs.clone(),
                synthetic: synthetic.clone(),
            };
            let mixed = mix(&data, 33).unwrap();
            let (src, trg): (Vec<String>, Vec<String>) = mixed.into_iter().unzip();
            let corpus = ParallelCorpus::from_lines(&src, &trg).unwrap();
            let seed = 700 + rep;
            let mut model = copy_task_model(&corpus, Direction::Forward, seed);
            train(&mut model, &corpus, None, &copy_train_config(seed, 250)).unwrap();
            ce.insert(format!("{regime:?}"), ensemble_cross_entropy(&[&model], &dev));
        }
        let none = ce["None"];
        let balanced = ce["Balanced"];
        if balanced <= none {
            wins += 1;
        }
        println!(
            "  rep {rep}: none {none:.4}, balanced {balanced:.4} ({})",
            if balanced <= none { "win" } else { "loss" }
        );
    }
    assert!(wins >= 8, "balanced mix won only {wins}/{reps} repetitions");
    println!(
        "[PASS] criterion 6: Balanced mix <= None mix in {wins}/{reps} repetitions, {:?}",
        started.elapsed()
    );
}

// ---------------------------------------------------------------------
// Criterion 7: segmentation suite
// ---------------------------------------------------------------------

#[test]
fn criterion_07_segmentation_suite() {
    // BPE apply/join round-trip on 1000 random lines.
    let alphabet = ["kissa", "hiiri", "talo", "j\u{e4}rvi", "news", "segment", "aamu", "y\u{f6}"];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lines: Vec<Vec<String>> = (0..1000)
        .map(|_| {
            let n = rng.random_range(1..10);
            (0..n).map(|_| alphabet.choose(&mut rng).unwrap().to_string()).collect()
        })
        .collect();
    let model = BpeModel::learn_to_vocab_size(lines.iter().flatten(), 40).unwrap();
    for line in &lines {
        assert_eq!(&bpe_join(&model.apply(line)), line);
    }

    // Hand-traced first merges.
    let aaab = BpeModel::learn(std::iter::repeat_n("aaab", 5), 1).unwrap();
    assert_eq!(aaab.merges(), &[("a".to_string(), "a".to_string())]);
    let corpus: Vec<&str> = std::iter::repeat_n("low", 5)
        .chain(std::iter::repeat_n("lower", 2))
        .chain(std::iter::repeat_n("newest", 6))
        .collect();
    let traced = BpeModel::learn(corpus, 2).unwrap();
    let m: Vec<(&str, &str)> = traced.merges().iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
    assert_eq!(m, vec![("w", "e"), ("l", "o")]);

    // Hyphen retokenizer recovers gold spacing for all four patterns with
    // an oracle scorer, starting from the tokenize/detokenize pipeline.
    let golds = [
        "Draamaa Riossa - suomalaisnostaja py\u{f6}rtyi",
        "Kempinski-hotelli",
        "kissa ja hiiri -leikki\u{e4}",
        "\u{f6}ljy- ja kaasutoiminnot",
    ];
    for gold in golds {
        let spaced = detokenize(&tokenize(gold));
        let variants = hyphen_variants(&spaced);
        let outcome =
            hyphen_retokenize(&variants, |v| Some(if v == gold { 1.0 } else { 0.0 })).unwrap();
        assert_eq!(outcome.sentence, gold);
    }
    println!("[PASS] criterion 7: segmentation suite (round-trip, merges, hyphen recovery)");
}

// ---------------------------------------------------------------------
// Criterion 8: metrics suite
// ---------------------------------------------------------------------

/// Independent corpus-BLEU oracle: same documented formula, separate
/// data structures and code path.
fn oracle_bleu(hyps: &[String], refs: &[String], max_n: usize) -> f64 {
    use std::collections::BTreeMap;
    let mut matched = vec![0u64; max_n];
    let mut totals = vec![0u64; max_n];
    let (mut hyp_len, mut ref_len) = (0u64, 0u64);
    for (h, r) in hyps.iter().zip(refs) {
        let ht = metric_tokenize(h, true);
        let rt = metric_tokenize(r, true);
        hyp_len += ht.len() as u64;
        ref_len += rt.len() as u64;
        for n in 1..=max_n {
            let mut rc: BTreeMap<Vec<String>, u64> = BTreeMap::new();
            if rt.len() >= n {
                for i in 0..=rt.len() - n {
                    *rc.entry(rt[i..i + n].to_vec()).or_insert(0) += 1;
                }
            }
            let mut hc: BTreeMap<Vec<String>, u64> = BTreeMap::new();
            if ht.len() >= n {
                for i in 0..=ht.len() - n {
                    *hc.entry(ht[i..i + n].to_vec()).or_insert(0) += 1;
                }
            }
            for (gram, c) in hc {
                totals[n - 1] += c;
                matched[n - 1] += c.min(rc.get(&gram).copied().unwrap_or(0));
            }
        }
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 0..max_n {
        if totals[n] == 0 {
            continue;
        }
        if matched[n] == 0 {
            return 0.0;
        }
        orders += 1;
        log_sum += (matched[n] as f64 / totals[n] as f64).ln();
    }
    if orders == 0 || hyp_len == 0 {
        return 0.0;
    }
    let bp = if hyp_len >= ref_len { 1.0 } else { (1.0 - ref_len as f64 / hyp_len as f64).exp() };
    bp * (log_sum / orders as f64).exp()
}

/// Minimum of shifts + edit distance over all shift sequences (same shift
/// legality as the implementation): breadth-first with pruning.
fn oracle_ter_edits(hyp: &[String], reference: &[String]) -> u64 {
    fn lev(a: &[String], b: &[String]) -> u64 {
        let mut prev: Vec<u64> = (0..=b.len() as u64).collect();
        let mut cur = vec![0u64; b.len() + 1];
        for (i, aw) in a.iter().enumerate() {
            cur[0] = i as u64 + 1;
            for (j, bw) in b.iter().enumerate() {
                let sub = prev[j] + u64::from(aw != bw);
                cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev[b.len()]
    }
    let mut best = lev(hyp, reference);
    let mut seen: HashMap<Vec<String>, u64> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(hyp.to_vec(), 0);
    queue.push_back((hyp.to_vec(), 0u64));
    while let Some((words, shifts)) = queue.pop_front() {
        if shifts + 1 >= best {
            continue;
        }
        for start in 0..words.len() {
            for len in 1..=(words.len() - start) {
                let block = &words[start..start + len];
                if reference.len() < len || !reference.windows(len).any(|w| w == block) {
                    continue;
                }
                for to in 0..=(words.len() - len) {
                    if to == start {
                        continue;
                    }
                    let mut rest: Vec<String> = Vec::with_capacity(words.len());
                    rest.extend_from_slice(&words[..start]);
                    rest.extend_from_slice(&words[start + len..]);
                    let mut shifted = Vec::with_capacity(words.len());
                    shifted.extend_from_slice(&rest[..to]);
                    shifted.extend_from_slice(block);
                    shifted.extend_from_slice(&rest[to..]);
                    let cost = shifts + 1;
                    best = best.min(cost + lev(&shifted, reference));
                    if seen.get(&shifted).is_none_or(|&s| s > cost) {
                        seen.insert(shifted.clone(), cost);
                        queue.push_back((shifted, cost));
                    }
                }
            }
        }
    }
    best
}

#[test]
fn criterion_08_metrics_suite() {
    // Identity values for arbitrary Unicode input.
    let text: Vec<String> = ["kissa istuu", "py\u{f6}rtyi\u{e4} \u{f6}ljy", "\u{4f60}\u{597d} \u{4e16}\u{754c}"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(bleu(&text, &text, true, 4).unwrap().corpus, 1.0);
    assert_eq!(chrf3(&text, &text, 6, 3.0).unwrap().corpus, 1.0);
    assert_eq!(ter(&text, &text).unwrap().corpus, 0.0);

    // BLEU against the independent n-gram-count oracle.
    let corpora: [(&[&str], &[&str]); 4] = [
        (&["the cat sat"], &["the cat sat down"]),
        (
            &["the cat sat on the mat", "a dog barked"],
            &["the cat lay on the mat", "the dog barked loudly"],
        ),
        (&["aa bb aa bb aa"], &["aa bb cc"]),
        (&["one two three four five six"], &["one two three four five six"]),
    ];
    for (hyps, refs) in corpora {
        let hyps: Vec<String> = hyps.iter().map(|s| s.to_string()).collect();
        let refs: Vec<String> = refs.iter().map(|s| s.to_string()).collect();
        let got = bleu(&hyps, &refs, true, 4).unwrap().corpus;
        let want = oracle_bleu(&hyps, &refs, 4);
        assert!((got - want).abs() <= 1e-9, "{got} vs oracle {want}");
    }

    // TER: greedy equals the exhaustive-shift oracle on every sentence of
    // length <= 6 in the test corpus.
    let pairs = [
        ("b a c", "a b c"),
        ("a b c", "a b c"),
        ("c b a", "a b c"),
        ("b c a d", "a b c d"),
        ("x y z", "a b c"),
        ("d a b c", "a b c d"),
        ("b a d c e", "a b c d e"),
        ("f e d c b a", "a b c d e f"),
        ("a c b e d f", "a b c d e f"),
        ("the cat sat", "the cat sat"),
        ("sat cat the", "the cat sat"),
        ("one three two four", "one two three four"),
    ];
    for (h, r) in pairs {
        let report = ter(&[h.to_string()], &[r.to_string()]).unwrap();
        let MetricDetail::Ter { edits, .. } = report.detail else { panic!() };
        let hyp_tokens = metric_tokenize(h, true);
        let ref_tokens = metric_tokenize(r, true);
        let oracle = oracle_ter_edits(&hyp_tokens, &ref_tokens);
        assert!(edits >= oracle, "greedy under-counts on {h:?}");
        assert_eq!(edits, oracle, "greedy vs optimal differ on {h:?} / {r:?}");
    }
    println!("[PASS] criterion 8: metrics suite (identities, BLEU oracle, TER oracle)");
}

// ---------------------------------------------------------------------
// Criterion 9: forward-backward reranking
// ---------------------------------------------------------------------

fn nbest(id: usize, entries: &[(&str, f64)]) -> NBestList {
    NBestList {
        sentence_id: id,
        hypotheses: entries
            .iter()
            .map(|(s, lp)| ScoredHypothesis {
                symbols: Vec::new(),
                surface: s.to_string(),
                log_prob: *lp,
                score: *lp,
            })
            .collect(),
    }
}

#[test]
fn criterion_09_fb_reranking() {
    // Disjoint lists: global max likelihood wins, provenance tags the side.
    let choice = fb_rerank(&nbest(0, &[("f", -3.0)]), &nbest(0, &[("b", -1.0)])).unwrap();
    assert_eq!((choice.surface.as_str(), choice.provenance), ("b", Provenance::Backward));
    let choice = fb_rerank(&nbest(0, &[("f", -0.5)]), &nbest(0, &[("b", -1.0)])).unwrap();
    assert_eq!((choice.surface.as_str(), choice.provenance), ("f", Provenance::Forward));

    // Identical singleton lists.
    let choice = fb_rerank(&nbest(0, &[("same", -2.0)]), &nbest(0, &[("same", -3.0)])).unwrap();
    assert_eq!((choice.surface.as_str(), choice.provenance), ("same", Provenance::Both));
    assert_eq!(choice.score, -5.0);

    // Intersection: best combined score wins over better single scores.
    let choice = fb_rerank(
        &nbest(0, &[("x", -0.1), ("y", -2.0)]),
        &nbest(0, &[("y", -1.0), ("z", -0.2)]),
    )
    .unwrap();
    assert_eq!((choice.surface.as_str(), choice.provenance), ("y", Provenance::Both));

    // Corpus-level provenance accounting fills all three buckets.
    let forward = vec![
        nbest(0, &[("shared one", -1.0), ("fwd alt", -2.0)]),
        nbest(1, &[("fwd wins", -0.4)]),
        nbest(2, &[("fwd loses", -6.0)]),
        nbest(3, &[("also shared", -1.5)]),
        nbest(4, &[("fwd strong", -0.2)]),
    ];
    let backward = vec![
        nbest(0, &[("shared one", -1.2)]),
        nbest(1, &[("bwd alt", -3.0)]),
        nbest(2, &[("bwd wins", -0.5)]),
        nbest(3, &[("also shared", -2.0), ("bwd alt", -4.0)]),
        nbest(4, &[("bwd weak", -5.0)]),
    ];
    let (choices, counts) = rerank_corpus(&forward, &backward).unwrap();
    assert_eq!(counts.both, 2);
    assert_eq!(counts.forward, 2);
    assert_eq!(counts.backward, 1);
    assert_eq!(counts.both + counts.forward + counts.backward, choices.len());
    assert!(counts.both > 0 && counts.forward > 0 && counts.backward > 0);
    println!(
        "[PASS] criterion 9: FB reranking rules and provenance buckets (both {} / forward {} / backward {})",
        counts.both, counts.forward, counts.backward
    );
}

// ---------------------------------------------------------------------
// Criterion 10: serialization round-trips
// ---------------------------------------------------------------------

#[test]
fn criterion_10_serialization_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);

    // 50 randomized checkpoints, bitwise.
    for case in 0..50u64 {
        let level = match case % 3 {
            0 => VocabLevel::Word,
            1 => VocabLevel::Char,
            _ => VocabLevel::Bpe,
        };
        let config = ModelConfig {
            word_embed_dim: rng.random_range(2..6),
            char_embed_dim: rng.random_range(2..5),
            encoder_state_dim: rng.random_range(2..6),
            decoder_state_dim: rng.random_range(2..7),
            attention_dim: rng.random_range(2..5),
            decoder_level: level,
            direction: if case % 2 == 0 { Direction::Forward } else { Direction::Backward },
            layer_norm: case % 5 == 0,
            context_gates: case % 7 == 0,
            ..ModelConfig::default()
        };
        let tokens = ["abc", "de", "py\u{f6}", "x"];
        let source_vocab = Vocabulary::build(VocabLevel::Word, tokens, None);
        let char_vocab = Vocabulary::build(
            VocabLevel::Char,
            tokens.iter().flat_map(|t| t.chars().map(|c| c.to_string())),
            None,
        );
        let target_vocab = Vocabulary::build(level, tokens, None);
        let model =
            TranslationModel::<f32>::new(config, source_vocab, char_vocab, target_vocab, case).unwrap();
        let sp = Savepoint::from_model(&model, &format!("rt{case}"), case * 11, None);
        let path = dir.path().join(format!("rt{case}.ckpt"));
        save_checkpoint(&sp, &path).unwrap();
        let loaded: Savepoint<f32> = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.label, sp.label);
        assert_eq!(loaded.config, sp.config);
        assert_eq!(loaded.source_vocab, sp.source_vocab);
        assert_eq!(loaded.target_vocab, sp.target_vocab);
        for (a, b) in loaded.params.iter().zip(sp.params.iter()) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.value().shape(), b.value().shape());
            for (x, y) in a.value().data().iter().zip(b.value().data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    // 50 randomized n-best lists, lossless up to 6-decimal formatting.
    for case in 0..50 {
        let lists: Vec<NBestList> = (0..rng.random_range(1..5))
            .map(|sid| NBestList {
                sentence_id: sid,
                hypotheses: (0..rng.random_range(1..6))
                    .map(|k| {
                        let lp = -rng.random_range(0.0..30.0);
                        ScoredHypothesis {
                            symbols: Vec::new(),
                            surface: format!("hyp {sid} {k} py\u{f6}"),
                            log_prob: lp,
                            score: lp,
                        }
                    })
                    .collect(),
            })
            .collect();
        let path = dir.path().join(format!("nb{case}.nbest"));
        write_nbest(&lists, &path).unwrap();
        let loaded = read_nbest(&path).unwrap();
        assert_eq!(loaded.len(), lists.len());
        for (a, b) in loaded.iter().zip(&lists) {
            assert_eq!(a.sentence_id, b.sentence_id);
            assert_eq!(a.hypotheses.len(), b.hypotheses.len());
            for (x, y) in a.hypotheses.iter().zip(&b.hypotheses) {
                assert_eq!(x.surface, y.surface);
                let rounded: f64 = format!("{:.6}", y.log_prob).parse().unwrap();
                assert_eq!(x.log_prob, rounded);
            }
        }
    }
    println!("[PASS] criterion 10: serialization round-trips (50 checkpoints, 50 n-best lists)");
}
