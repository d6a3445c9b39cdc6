//! Neural surrogate for the reference-direction intensity map, extended to
//! all equispaced incident directions by cyclic symmetry.

mod data;
pub(crate) mod model;
mod normalize;
mod train;

pub use data::{
    generate_training_data, load_training_set, reference_intensity, sample_for_index, save_training_set,
    TrainingMeta, TrainingSet, DATA_FORMAT_VERSION,
};
pub use model::{
    load_model, save_model, ModelMeta, Network, SurrogateModel, SymmetryPlan, Workspace, MODEL_FORMAT_VERSION,
};
pub use normalize::{Normalization, STD_EPS};
pub use train::{fit_network, train, Fit, TrainConfig, TrainReport};
