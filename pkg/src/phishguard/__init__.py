"""Screenshot-driven, reference-based phishing detection with a real-time
compute budget, plus the evaluation harness measuring it."""

from .classification import (
    BrandModel,
    BrandPrediction,
    CrpModel,
    CrpPrediction,
    ReferenceList,
    SceneBrandModel,
    classify_brand,
    classify_crp,
    load_reference_list,
)
from .detection import (
    DEFAULT_CANVAS,
    CanvasSize,
    DetectorBackend,
    FeatureTensor,
    RawDetections,
    SceneElement,
    SceneSpec,
    SyntheticBackend,
    decode_detections,
    select_logo,
    synthetic_backend,
)
from .geometry import DetectionBox, ElementClass, NmsConfig, Rect, iou, nms
from .pipeline import (
    BlacklistStore,
    Frame,
    GovernorConfig,
    GovernorStats,
    ModelBundle,
    PixelRect,
    RegionOfInterest,
    Verdict,
    analyze,
    analyze_trace,
    crop_roi,
    load_blacklist,
    prefilter_url,
    run_governed,
)
from .tensors import (
    MlpSpec,
    Tensor,
    WeightStore,
    load_weights,
    mlp_forward,
    quantize,
    save_weights,
    softmax,
)

__version__ = "0.1.0"
