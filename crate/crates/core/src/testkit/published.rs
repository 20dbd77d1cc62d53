//! Printed t-test p-values and h-decisions at alpha = 0.05, 0.2, 0.35.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedTest {
    pub metric: &'static str,
    pub pair: &'static str,
    pub model: &'static str,
    pub p: f64,
    pub h: [u8; 3],
}

const fn row(metric: &'static str, pair: &'static str, model: &'static str, p: f64, h: [u8; 3]) -> PublishedTest {
    PublishedTest { metric, pair, model, p, h }
}

const BIC: &str = "NEA_NEA/BIC_BIC";
const BIL: &str = "NEA_NEA/BIL_BIL";
const NBIC: &str = "NEA_NEA/NEA_BIC";
const NBIL: &str = "NEA_NEA/NEA_BIL";
const DL: &str = "DeepLab/R50";
const SN: &str = "SEGNET";
const UN: &str = "UNET";

pub const ROWS: [PublishedTest; 48] = [
    row("IoU", BIC, DL, 0.5185, [0, 0, 0]),
    row("IoU", BIC, SN, 0.8512, [0, 0, 0]),
    row("IoU", BIC, UN, 0.0249, [1, 1, 1]),
    row("IoU", BIL, DL, 0.8203, [0, 0, 0]),
    row("IoU", BIL, SN, 0.4676, [0, 0, 0]),
    row("IoU", BIL, UN, 0.2746, [0, 0, 1]),
    row("IoU", NBIC, DL, 0.0161, [1, 1, 1]),
    row("IoU", NBIC, SN, 0.8416, [0, 0, 0]),
    row("IoU", NBIC, UN, 0.3739, [0, 0, 0]),
    row("IoU", NBIL, DL, 1.0000, [0, 0, 0]),
    row("IoU", NBIL, SN, 1.0000, [0, 0, 0]),
    row("IoU", NBIL, UN, 0.0705, [0, 1, 1]),
    row("Accuracy", BIC, DL, 0.1012, [0, 1, 1]),
    row("Accuracy", BIC, SN, 0.8512, [0, 0, 0]),
    row("Accuracy", BIC, UN, 0.0006, [1, 1, 1]),
    row("Accuracy", BIL, DL, 0.6213, [0, 0, 0]),
    row("Accuracy", BIL, SN, 0.8149, [0, 0, 0]),
    row("Accuracy", BIL, UN, 0.0241, [1, 1, 1]),
    row("Accuracy", NBIC, DL, 0.8025, [0, 0, 0]),
    row("Accuracy", NBIC, SN, 0.6530, [0, 0, 0]),
    row("Accuracy", NBIC, UN, 0.5185, [0, 0, 0]),
    row("Accuracy", NBIL, DL, 0.5614, [0, 0, 0]),
    row("Accuracy", NBIL, SN, 0.8512, [0, 0, 0]),
    row("Accuracy", NBIL, UN, 0.0132, [1, 1, 1]),
    row("meanBFScore", BIC, DL, 0.6779, [0, 0, 0]),
    row("meanBFScore", BIC, SN, 0.2943, [0, 0, 1]),
    row("meanBFScore", BIC, UN, 0.0668, [0, 1, 1]),
    row("meanBFScore", BIL, DL, 1.0000, [0, 0, 0]),
    row("meanBFScore", BIL, SN, 0.7780, [0, 0, 0]),
    row("meanBFScore", BIL, UN, 0.7247, [0, 0, 0]),
    row("meanBFScore", NBIC, DL, 0.3295, [0, 0, 1]),
    row("meanBFScore", NBIC, SN, 0.6087, [0, 0, 0]),
    row("meanBFScore", NBIC, UN, 0.2051, [0, 0, 1]),
    row("meanBFScore", NBIL, DL, 0.8203, [0, 0, 0]),
    row("meanBFScore", NBIL, SN, 0.5072, [0, 0, 0]),
    row("meanBFScore", NBIL, UN, 1.0000, [0, 0, 0]),
    row("DiceScore", BIC, DL, 0.5185, [0, 0, 0]),
    row("DiceScore", BIC, SN, 0.8512, [0, 0, 0]),
    row("DiceScore", BIC, UN, 0.0249, [1, 1, 1]),
    row("DiceScore", BIL, DL, 0.8203, [0, 0, 0]),
    row("DiceScore", BIL, SN, 0.4676, [0, 0, 0]),
    row("DiceScore", BIL, UN, 0.2746, [0, 0, 1]),
    row("DiceScore", NBIC, DL, 0.0161, [1, 1, 1]),
    row("DiceScore", NBIC, SN, 0.8416, [0, 0, 0]),
    row("DiceScore", NBIC, UN, 0.3739, [0, 0, 0]),
    row("DiceScore", NBIL, DL, 1.0000, [0, 0, 0]),
    row("DiceScore", NBIL, SN, 1.0000, [0, 0, 0]),
    row("DiceScore", NBIL, UN, 0.0705, [0, 1, 1]),
];
