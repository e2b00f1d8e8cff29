//! Concrete problem instances.

pub mod data;
pub mod game;
pub mod qcqp;
pub mod svm;

pub use data::{blobs, load_csv_dataset, Dataset};
pub use game::{matrix_game, BilinearBox, MatrixGame};
pub use qcqp::{gen_qcqp, qcqp_to_conic, QcqpConic, QcqpInstance};
pub use svm::{build_kernel_matrices, build_svm_saddle, predict_labels, KernelSpec, KernelSvmInstance, SvmSaddle, SvmVariant};
