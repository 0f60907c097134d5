use electorate_core::cnn::{evaluate, train, TrainConfig};
use electorate_core::synthetic::separable_dataset;
use electorate_core::Gender;

#[test]
fn separable_faces_are_learned() {
    let train_set = separable_dataset(2_000, 0, 11);
    let test_set = separable_dataset(500, 1_000_000, 12);
    let config = TrainConfig { seed: 1, ..TrainConfig::default() };
    let out = train(&train_set, &config).unwrap();
    let metrics = evaluate(&out.params, &test_set, Gender::Male).unwrap();
    assert!(metrics.accuracy >= 0.98, "{metrics:?}");
    assert_eq!(out.loss_trace.len(), 10);
}

// Ten full-size runs would dominate the suite, so this uses 500 examples.
#[test]
fn loss_settles_after_second_epoch_for_most_seeds() {
    let data = separable_dataset(500, 0, 21);
    let monotone = (0..10)
        .filter(|&seed| {
            let config = TrainConfig { seed, ..TrainConfig::default() };
            let trace = train(&data, &config).unwrap().loss_trace;
            trace[1..].windows(2).all(|w| w[1] <= w[0])
        })
        .count();
    assert!(monotone >= 9, "only {monotone} of 10 seeds");
}
