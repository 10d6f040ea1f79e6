//! File formats: IDX image input, `SSPK` checkpoints, PNG montages and plots,
//! CSV tables.

pub mod checkpoint;
pub mod export;
pub mod idx;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use export::{montage, read_csv, write_csv, write_image_grid, write_line_plot, Series};
pub use idx::{
    load_idx_images, load_idx_labels, load_image_set, parse_idx_images, parse_idx_labels,
    sample_split, sample_subset, ImageSet,
};
