//! Statistical sanity check for the skip-gram trainer: on a corpus built
//! from two disjoint vocabularies, words must end up much closer to their
//! own topic than to the other one.

use archminer_core::embedding::{train_skipgram, EmbeddingConfig, EmbeddingModel};
use archminer_core::synth::two_topic_corpus;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn topic_means(model: &EmbeddingModel, topic_a: &[String], topic_b: &[String]) -> (f64, f64) {
    let present = |topic: &[String]| -> Vec<String> {
        topic.iter().filter(|t| model.contains(t)).cloned().collect()
    };
    let (a, b) = (present(topic_a), present(topic_b));

    let mut intra = Vec::new();
    for topic in [&a, &b] {
        for i in 0..topic.len() {
            for j in i + 1..topic.len() {
                intra.push(model.similarity(&topic[i], &topic[j]).unwrap());
            }
        }
    }
    let mut inter = Vec::new();
    for t1 in &a {
        for t2 in &b {
            inter.push(model.similarity(t1, t2).unwrap());
        }
    }
    (mean(&intra), mean(&inter))
}

#[test]
fn disjoint_topics_separate_in_vector_space() {
    let corpus = two_topic_corpus(42, 60, 50, 30);
    let config = EmbeddingConfig::default();
    let model = train_skipgram(&corpus.docs, &config).unwrap();

    // Both topic vocabularies clear min_count, giving 100 terms in total.
    assert_eq!(model.len(), 100);

    // Every term is its own nearest point in cosine space.
    for term in model.terms() {
        let self_sim = model.similarity(term, term).unwrap();
        assert!(
            (self_sim - 1.0).abs() <= 1e-9,
            "similarity({term},{term}) = {self_sim}"
        );
    }

    let (intra, inter) = topic_means(&model, &corpus.topic_a, &corpus.topic_b);
    assert!(
        intra - inter >= 0.2,
        "topic separation too weak: intra {intra:.3}, inter {inter:.3}"
    );
}
