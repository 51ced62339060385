//! Datasets, CSV ingestion, the synthetic control tasks, stratified splits
//! and the train-fitted scalers.

mod csv_load;
mod dataset;
mod scale;
mod split;
mod synth;

pub use csv_load::{load_csv, write_csv, CsvSchema};
pub use dataset::Dataset;
pub use scale::{fit_minmax, fit_standardizer, MinMaxScaler, Standardizer};
pub use split::{stratified_split, Split};
pub use synth::{gen_high_rank_noise, gen_parity};
