//! Raster primitives shared by every pipeline stage: RGB images, float
//! channel planes, binary masks, connected components and boundary tracing.

mod mask;
mod raster;
mod region;

pub use mask::{
    connected_components, fill_holes, largest_component, majority_filter, BinaryMask,
    ComponentStats, Connectivity, LabelMap,
};
pub use raster::{
    downsample, downsample_mask_nearest, to_gray, to_hsv, upsample_mask_nearest, ChannelPlane,
    RasterImage, Rect,
};
pub use region::{trace_boundary, BoundaryTrace, Region};
