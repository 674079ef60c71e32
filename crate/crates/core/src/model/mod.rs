//! The three-network translation model: a character-level encoder for
//! out-of-vocabulary source tokens, a bidirectional token-level encoder,
//! and an attentional LSTM decoder over characters, words, or subwords.

mod checkpoint;
mod config;
mod savepoint;
mod train;
mod vocab;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{Direction, ModelConfig};
pub use savepoint::{average_parameters, select_best_savepoint, HeldoutScores, Savepoint};
pub use train::{train, ParallelCorpus, TrainConfig};
pub use vocab::{Vocabulary, VocabLevel, BOS, BOS_TOKEN, EOS, EOS_TOKEN, PAD, PAD_TOKEN, UNK, UNK_TOKEN};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decoding::StepModel;
use crate::error::{Error, Result};
use crate::nn::{
    sample_mask, xavier_uniform, AttentionModule, ContextGate, DropoutMask, EmbeddingTable, LstmCell,
    LstmVariant,
};
use crate::tensor::{Element, HasParameters, NodeId, ParamId, Parameters, Tape, Tensor};

impl<T: Element> HasParameters<T> for TranslationModel<T> {
    fn parameters(&self) -> &Parameters<T> {
        &self.params
    }
    fn parameters_mut(&mut self) -> &mut Parameters<T> {
        &mut self.params
    }
}

/// Layer handles; the tensors themselves live in the parameter set.
#[derive(Clone, Debug)]
struct Layers {
    word_emb: EmbeddingTable,
    char_emb: EmbeddingTable,
    char_lstm: LstmCell,
    char_proj_w: ParamId,
    char_proj_b: ParamId,
    enc_fwd: LstmCell,
    enc_bwd: LstmCell,
    init_h_w: ParamId,
    init_h_b: ParamId,
    init_c_w: ParamId,
    init_c_b: ParamId,
    trg_emb: EmbeddingTable,
    attention: AttentionModule,
    dec_cell: LstmCell,
    gate: Option<GateWiring>,
    out_w: ParamId,
    out_b: ParamId,
}

#[derive(Clone, Debug)]
struct GateWiring {
    gate: ContextGate,
    src_proj: ParamId, // [2 enc x dec-input]
    tgt_proj: ParamId, // [emb x dec-input]
}

/// Annotations produced by the bidirectional encoder, still on the tape.
pub struct EncodedSource {
    /// `[len x 2 encoder_state_dim]` annotation matrix.
    pub annotations: NodeId,
    pub len: usize,
    /// Final hidden state of the backward encoder (token 0), used to
    /// initialize the decoder.
    pub final_backward: NodeId,
}

/// Annotation values detached from any tape, for inference.
#[derive(Clone, Debug)]
pub struct EncodedSourceValue<T: Element = f32> {
    pub annotations: Tensor<T>,
    pub len: usize,
    pub final_backward: Tensor<T>,
}

/// Everything the decoder produces in one step.
pub struct DecoderStep {
    pub logits: NodeId,
    pub context: NodeId,
    /// `[src_len x 1]` attention distribution.
    pub weights: NodeId,
    pub h: NodeId,
    pub c: NodeId,
}

/// A complete translation model over one parameter set.
#[derive(Clone, Debug)]
pub struct TranslationModel<T: Element = f32> {
    config: ModelConfig,
    source_vocab: Vocabulary,
    char_vocab: Vocabulary,
    target_vocab: Vocabulary,
    params: Parameters<T>,
    layers: Layers,
}

impl<T: Element> TranslationModel<T> {
    /// Builds a freshly initialized model. Initialization is deterministic
    /// in `seed`.
    pub fn new(
        config: ModelConfig,
        source_vocab: Vocabulary,
        char_vocab: Vocabulary,
        target_vocab: Vocabulary,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if source_vocab.level() != VocabLevel::Word {
            return Err(Error::parameter("source vocabulary must be word level"));
        }
        if char_vocab.level() != VocabLevel::Char {
            return Err(Error::parameter("char vocabulary must be char level"));
        }
        if target_vocab.level() != config.decoder_level {
            return Err(Error::parameter(format!(
                "target vocabulary level {} does not match decoder level {}",
                target_vocab.level(),
                config.decoder_level
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Parameters::new();
        let variant = if config.layer_norm { LstmVariant::LayerNorm } else { LstmVariant::Plain };
        let wd = config.word_embed_dim;
        let cd = config.char_embed_dim;
        let enc = config.encoder_state_dim;
        let dec = config.decoder_state_dim;
        let emb = config.target_embed_dim();
        let dec_input = emb + 2 * enc;

        let word_emb = EmbeddingTable::init("src.word_emb", &mut params, &mut rng, source_vocab.len(), wd)?;
        let char_emb = EmbeddingTable::init("src.char_emb", &mut params, &mut rng, char_vocab.len(), cd)?;
        let char_lstm = LstmCell::init("src.char_lstm", &mut params, &mut rng, cd, wd, variant)?;
        let char_proj_w = params.register("src.char_proj.w", xavier_uniform(&mut rng, wd, wd))?;
        let char_proj_b = params.register("src.char_proj.b", Tensor::zeros(vec![1, wd]))?;
        let enc_fwd = LstmCell::init("enc.fwd", &mut params, &mut rng, wd, enc, variant)?;
        let enc_bwd = LstmCell::init("enc.bwd", &mut params, &mut rng, wd, enc, variant)?;
        let init_h_w = params.register("dec.init_h.w", xavier_uniform(&mut rng, enc, dec))?;
        let init_h_b = params.register("dec.init_h.b", Tensor::zeros(vec![1, dec]))?;
        let init_c_w = params.register("dec.init_c.w", xavier_uniform(&mut rng, enc, dec))?;
        let init_c_b = params.register("dec.init_c.b", Tensor::zeros(vec![1, dec]))?;
        let trg_emb = EmbeddingTable::init("dec.emb", &mut params, &mut rng, target_vocab.len(), emb)?;
        let attention = AttentionModule::init("dec.att", &mut params, &mut rng, 2 * enc, dec, config.attention_dim)?;
        let dec_cell = LstmCell::init("dec.cell", &mut params, &mut rng, dec_input, dec, variant)?;
        let gate = if config.context_gates {
            let gate = ContextGate::init("dec.gate", &mut params, &mut rng, dec, emb, 2 * enc, dec_input)?;
            let src_proj = params.register("dec.gate.src_proj", xavier_uniform(&mut rng, 2 * enc, dec_input))?;
            let tgt_proj = params.register("dec.gate.tgt_proj", xavier_uniform(&mut rng, emb, dec_input))?;
            Some(GateWiring { gate, src_proj, tgt_proj })
        } else {
            None
        };
        let out_w = params.register("dec.out.w", xavier_uniform(&mut rng, dec + 2 * enc + emb, target_vocab.len()))?;
        let out_b = params.register("dec.out.b", Tensor::zeros(vec![1, target_vocab.len()]))?;

        Ok(TranslationModel {
            config,
            source_vocab,
            char_vocab,
            target_vocab,
            params,
            layers: Layers {
                word_emb,
                char_emb,
                char_lstm,
                char_proj_w,
                char_proj_b,
                enc_fwd,
                enc_bwd,
                init_h_w,
                init_h_b,
                init_c_w,
                init_c_b,
                trg_emb,
                attention,
                dec_cell,
                gate,
                out_w,
                out_b,
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn source_vocab(&self) -> &Vocabulary {
        &self.source_vocab
    }

    pub fn char_vocab(&self) -> &Vocabulary {
        &self.char_vocab
    }

    pub fn target_vocab(&self) -> &Vocabulary {
        &self.target_vocab
    }

    pub fn params(&self) -> &Parameters<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters<T> {
        &mut self.params
    }

    /// Embeds one source token: table lookup when in vocabulary, otherwise
    /// the character LSTM runs over the token's characters and its final
    /// hidden state is projected into the word embedding space.
    fn embed_token(
        &self,
        tape: &mut Tape<T>,
        token: &str,
        char_override: Option<&dyn Fn(&str) -> Tensor<T>>,
        char_invocations: &mut usize,
    ) -> Result<NodeId> {
        if self.source_vocab.contains(token) {
            return self.layers.word_emb.lookup(tape, &self.params, self.source_vocab.encode(token) as usize);
        }
        *char_invocations += 1;
        if let Some(f) = char_override {
            return Ok(tape.input(f(token)));
        }
        let (h0, c0) = self.layers.char_lstm.zero_state::<T>();
        let mut h = tape.input(h0);
        let mut c = tape.input(c0);
        for ch in token.chars() {
            let id = self.char_vocab.encode(&ch.to_string()) as usize;
            let x = self.layers.char_emb.lookup(tape, &self.params, id)?;
            let (h2, c2) = self.layers.char_lstm.step(tape, &self.params, x, h, c, None)?;
            h = h2;
            c = c2;
        }
        let w = tape.param(self.params.get(self.layers.char_proj_w));
        let b = tape.param(self.params.get(self.layers.char_proj_b));
        let proj = tape.matmul(h, w)?;
        tape.add(proj, b)
    }

    /// Embeds every source token, returning per-token embedding nodes and
    /// the number of character-encoder invocations.
    pub fn embed_source_tokens(
        &self,
        tape: &mut Tape<T>,
        tokens: &[String],
        char_override: Option<&dyn Fn(&str) -> Tensor<T>>,
    ) -> Result<(Vec<NodeId>, usize)> {
        if tokens.is_empty() {
            return Err(Error::contract("cannot encode an empty source sequence"));
        }
        let mut char_invocations = 0;
        let mut out = Vec::with_capacity(tokens.len());
        for t in tokens {
            out.push(self.embed_token(tape, t, char_override, &mut char_invocations)?);
        }
        Ok((out, char_invocations))
    }

    /// Runs the bidirectional encoder: one annotation per source token,
    /// each the concatenation of the forward and backward states.
    pub fn encode_source(&self, tape: &mut Tape<T>, tokens: &[String]) -> Result<EncodedSource> {
        self.encode_source_with(tape, tokens, None, None).map(|(enc, _)| enc)
    }

    /// As [`encode_source`](Self::encode_source), optionally with a stubbed
    /// character encoder and dropout masks (training).
    pub fn encode_source_with(
        &self,
        tape: &mut Tape<T>,
        tokens: &[String],
        char_override: Option<&dyn Fn(&str) -> Tensor<T>>,
        masks: Option<&EncoderMasks<T>>,
    ) -> Result<(EncodedSource, usize)> {
        let (embeddings, char_invocations) = self.embed_source_tokens(tape, tokens, char_override)?;
        let len = embeddings.len();

        let (h0, c0) = self.layers.enc_fwd.zero_state::<T>();
        let mut h = tape.input(h0);
        let mut c = tape.input(c0);
        let mut fwd_states = Vec::with_capacity(len);
        for &x in &embeddings {
            let (h2, c2) = self.layers.enc_fwd.step(tape, &self.params, x, h, c, masks.map(|m| &m.forward))?;
            h = h2;
            c = c2;
            fwd_states.push(h);
        }

        let (h0, c0) = self.layers.enc_bwd.zero_state::<T>();
        let mut h = tape.input(h0);
        let mut c = tape.input(c0);
        let mut bwd_states = vec![h; len];
        for (i, &x) in embeddings.iter().enumerate().rev() {
            let (h2, c2) = self.layers.enc_bwd.step(tape, &self.params, x, h, c, masks.map(|m| &m.backward))?;
            h = h2;
            c = c2;
            bwd_states[i] = h;
        }
        let final_backward = bwd_states[0];

        let mut rows = Vec::with_capacity(len);
        for i in 0..len {
            rows.push(tape.concat(&[fwd_states[i], bwd_states[i]], 1)?);
        }
        let annotations = if rows.len() == 1 { rows[0] } else { tape.concat(&rows, 0)? };
        Ok((EncodedSource { annotations, len, final_backward }, char_invocations))
    }

    /// Learned projection of the final backward encoder state.
    pub fn decoder_start(&self, tape: &mut Tape<T>, encoded: &EncodedSource) -> Result<(NodeId, NodeId)> {
        let wh = tape.param(self.params.get(self.layers.init_h_w));
        let bh = tape.param(self.params.get(self.layers.init_h_b));
        let wc = tape.param(self.params.get(self.layers.init_c_w));
        let bc = tape.param(self.params.get(self.layers.init_c_b));
        let ph = tape.matmul(encoded.final_backward, wh)?;
        let ph = tape.add(ph, bh)?;
        let h = tape.tanh(ph);
        let pc = tape.matmul(encoded.final_backward, wc)?;
        let pc = tape.add(pc, bc)?;
        let c = tape.tanh(pc);
        Ok((h, c))
    }

    /// One decoder step: attend from the previous state, update the LSTM,
    /// and produce output logits from `(state, context, symbol embedding)`.
    pub fn decoder_step(
        &self,
        tape: &mut Tape<T>,
        annotations: NodeId,
        prev_symbol: u32,
        h: NodeId,
        c: NodeId,
        mask: Option<&DropoutMask<T>>,
    ) -> Result<DecoderStep> {
        let y = self.layers.trg_emb.lookup(tape, &self.params, prev_symbol as usize)?;
        let (context, weights) = self.layers.attention.attend(tape, &self.params, h, annotations)?;
        let u = match &self.layers.gate {
            None => tape.concat(&[y, context], 1)?,
            Some(wiring) => {
                let sp = tape.param(self.params.get(wiring.src_proj));
                let tp = tape.param(self.params.get(wiring.tgt_proj));
                let src_stream = tape.matmul(context, sp)?;
                let tgt_stream = tape.matmul(y, tp)?;
                let (gs, gt) =
                    wiring.gate.apply(tape, &self.params, h, y, context, src_stream, tgt_stream)?;
                tape.add(gs, gt)?
            }
        };
        let (h2, c2) = self.layers.dec_cell.step(tape, &self.params, u, h, c, mask)?;
        let readout = tape.concat(&[h2, context, y], 1)?;
        let w = tape.param(self.params.get(self.layers.out_w));
        let b = tape.param(self.params.get(self.layers.out_b));
        let proj = tape.matmul(readout, w)?;
        let logits = tape.add(proj, b)?;
        Ok(DecoderStep { logits, context, weights, h: h2, c: c2 })
    }

    /// Encodes a target line into decoder symbol ids: split at the decoder
    /// level, reverse for backward models, and terminate with EOS.
    pub fn encode_target_line(&self, line: &str) -> Vec<u32> {
        let mut symbols = self.target_vocab.split_line(line);
        if self.config.direction == Direction::Backward {
            symbols.reverse();
        }
        let mut ids: Vec<u32> = symbols.iter().map(|s| self.target_vocab.encode(s)).collect();
        ids.push(EOS);
        ids
    }

    /// Renders decoded symbol ids (EOS excluded) as a surface line,
    /// un-reversing the output of backward models.
    pub fn render_symbols(&self, symbols: &[u32]) -> String {
        let mut ids: Vec<u32> = symbols.to_vec();
        if self.config.direction == Direction::Backward {
            ids.reverse();
        }
        let toks: Vec<String> =
            ids.iter().map(|&id| self.target_vocab.decode(id).to_string()).collect();
        self.target_vocab.join_symbols(&toks)
    }

    /// Builds the summed teacher-forced negative log-likelihood of a batch
    /// on `tape`; returns the scalar loss node (mean per target token, EOS
    /// included) and the token count.
    pub fn build_batch_loss(
        &self,
        tape: &mut Tape<T>,
        batch: &[(Vec<String>, Vec<u32>)],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(NodeId, usize)> {
        if batch.is_empty() {
            return Err(Error::contract("loss of an empty batch"));
        }
        let mut rng = dropout_rng;
        let mut token_count = 0usize;
        let mut total: Option<NodeId> = None;
        for (src, trg_ids) in batch {
            let masks = match &mut rng {
                Some(rng) if self.config.dropout_keep_prob < 1.0 => {
                    Some(self.sample_masks(rng)?)
                }
                _ => None,
            };
            let (encoded, _) = self.encode_source_with(tape, src, None, masks.as_ref().map(|m| &m.encoder))?;
            let (mut h, mut c) = self.decoder_start(tape, &encoded)?;
            let mut prev = BOS;
            for &target in trg_ids {
                let step = self.decoder_step(
                    tape,
                    encoded.annotations,
                    prev,
                    h,
                    c,
                    masks.as_ref().map(|m| &m.decoder),
                )?;
                let logp = tape.log_softmax(step.logits, 1)?;
                let picked = tape.pick(logp, target as usize)?;
                total = Some(match total {
                    None => picked,
                    Some(t) => tape.add(t, picked)?,
                });
                token_count += 1;
                prev = target;
                h = step.h;
                c = step.c;
            }
        }
        let total = total.ok_or_else(|| Error::contract("batch contains no target tokens"))?;
        let loss = tape.scale(total, T::from_f64(-1.0 / token_count as f64));
        Ok((loss, token_count))
    }

    fn sample_masks(&self, rng: &mut ChaCha8Rng) -> Result<SequenceMasks<T>> {
        let keep = self.config.dropout_keep_prob;
        let enc = self.config.encoder_state_dim;
        let dec = self.config.decoder_state_dim;
        Ok(SequenceMasks {
            encoder: EncoderMasks {
                forward: sample_mask(keep, &[1, enc], rng)?,
                backward: sample_mask(keep, &[1, enc], rng)?,
            },
            decoder: sample_mask(keep, &[1, dec], rng)?,
        })
    }

    /// Mean per-token cross-entropy of a batch, in nats (evaluation mode:
    /// no dropout).
    pub fn compute_loss(&self, batch: &[(Vec<String>, Vec<u32>)]) -> Result<f64> {
        let mut tape = Tape::new();
        let (loss, _) = self.build_batch_loss(&mut tape, batch, None)?;
        Ok(tape.value(loss).item().as_f64())
    }

    /// Detached encoder output for inference.
    pub fn encode_source_value(&self, tokens: &[String]) -> Result<EncodedSourceValue<T>> {
        let mut tape = Tape::new();
        let encoded = self.encode_source(&mut tape, tokens)?;
        Ok(EncodedSourceValue {
            annotations: tape.detach(encoded.annotations),
            len: encoded.len,
            final_backward: tape.detach(encoded.final_backward),
        })
    }

    /// Step-decoder view of this model for one source sentence.
    pub fn decoder<'a>(&'a self, src_tokens: &[String]) -> Result<ModelDecoder<'a, T>> {
        let encoded = self.encode_source_value(src_tokens)?;
        Ok(ModelDecoder { model: self, encoded })
    }

    /// Rebuilds a typed model from a savepoint, verifying that the stored
    /// parameters match the architecture the config implies.
    pub fn from_savepoint(sp: &Savepoint<T>) -> Result<Self> {
        let mut model = Self::new(
            sp.config.clone(),
            sp.source_vocab.clone(),
            sp.char_vocab.clone(),
            sp.target_vocab.clone(),
            0,
        )?;
        if model.params.len() != sp.params.len() {
            return Err(Error::contract(format!(
                "checkpoint holds {} parameters but the config implies {}",
                sp.params.len(),
                model.params.len()
            )));
        }
        for p in model.params.iter_mut() {
            let stored = sp.params.by_name(p.name()).ok_or_else(|| {
                Error::contract(format!("checkpoint is missing parameter {:?}", p.name()))
            })?;
            if stored.value().shape() != p.value().shape() {
                return Err(Error::contract(format!(
                    "parameter {:?} has shape {:?} in the checkpoint but the config implies {:?}",
                    p.name(),
                    stored.value().shape(),
                    p.value().shape()
                )));
            }
            *p.value_mut() = stored.value().clone();
        }
        Ok(model)
    }

    /// Default decoding length budget for a source sentence.
    pub fn default_max_len(&self, src_tokens: &[String]) -> usize {
        match self.config.decoder_level {
            VocabLevel::Char => {
                let chars: usize = src_tokens.iter().map(|t| t.chars().count() + 1).sum();
                3 * chars.max(1) + 8
            }
            VocabLevel::Word | VocabLevel::Bpe => 3 * src_tokens.len().max(1) + 8,
        }
    }

    /// Beam-search translation to an n-best list of surface strings
    /// (backward models are un-reversed during rendering).
    pub fn translate_nbest(
        &self,
        src_tokens: &[String],
        beam_size: usize,
        max_len: usize,
        penalties: &crate::decoding::PenaltyConfig,
        nbest: usize,
        sentence_id: usize,
    ) -> Result<crate::decoding::NBestList> {
        let decoder = self.decoder(src_tokens)?;
        crate::decoding::beam_search(&decoder, beam_size, max_len, penalties, nbest, sentence_id, &|syms| {
            self.render_symbols(syms)
        })
    }

    /// Greedy (beam 1) translation with neutral penalties.
    pub fn translate_greedy(&self, src_tokens: &[String]) -> Result<String> {
        let list = self.translate_nbest(
            src_tokens,
            1,
            self.default_max_len(src_tokens),
            &crate::decoding::PenaltyConfig::default(),
            1,
            0,
        )?;
        Ok(list.best().map(|h| h.surface.clone()).unwrap_or_default())
    }
}

/// Dropout masks for the two encoder directions.
pub struct EncoderMasks<T: Element> {
    pub forward: DropoutMask<T>,
    pub backward: DropoutMask<T>,
}

struct SequenceMasks<T: Element> {
    encoder: EncoderMasks<T>,
    decoder: DropoutMask<T>,
}

/// Inference-time decoder over detached values; each step runs a private
/// throwaway tape.
pub struct ModelDecoder<'a, T: Element = f32> {
    model: &'a TranslationModel<T>,
    encoded: EncodedSourceValue<T>,
}

/// Decoder state carried between inference steps.
#[derive(Clone)]
pub struct ModelDecoderState<T: Element = f32> {
    h: Tensor<T>,
    c: Tensor<T>,
}


impl<T: Element> StepModel for ModelDecoder<'_, T> {
    type State = ModelDecoderState<T>;

    fn start(&self) -> Self::State {
        let mut tape = Tape::new();
        let annotations = tape.input(self.encoded.annotations.clone());
        let final_backward = tape.input(self.encoded.final_backward.clone());
        let encoded = EncodedSource { annotations, len: self.encoded.len, final_backward };
        let (h, c) = self.model.decoder_start(&mut tape, &encoded).expect("state projection");
        ModelDecoderState { h: tape.detach(h), c: tape.detach(c) }
    }

    fn vocab_size(&self) -> usize {
        self.model.target_vocab.len()
    }

    fn eos_id(&self) -> u32 {
        EOS
    }

    fn step(&self, state: &Self::State, prev: Option<u32>) -> (Vec<f64>, Vec<f64>, Self::State) {
        let mut tape = Tape::new();
        let annotations = tape.input(self.encoded.annotations.clone());
        let h = tape.input(state.h.clone());
        let c = tape.input(state.c.clone());
        let step = self
            .model
            .decoder_step(&mut tape, annotations, prev.unwrap_or(BOS), h, c, None)
            .expect("decoder step on validated shapes");
        let probs_node = tape.softmax(step.logits, 1).expect("softmax over logits");
        let probs = tape.value(probs_node).data().iter().map(|&v| v.as_f64()).collect();
        let weights = tape.value(step.weights).data().iter().map(|&v| v.as_f64()).collect();
        (probs, weights, ModelDecoderState { h: tape.detach(step.h), c: tape.detach(step.c) })
    }
}
