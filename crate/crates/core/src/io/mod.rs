//! File formats: PGM/PNG images, parameter files and forest tables.

mod forest;
mod image;
mod paramfile;

pub use self::forest::{read_forest_csv, write_matrix_csv, ForestFile};
pub use self::image::{read_image, read_pgm, write_pgm};
pub use self::paramfile::{ModelKind, ParamFile, FORMAT_VERSION};
