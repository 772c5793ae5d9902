"""Random-dot fiducial markers: generation, hashing, detection, benchmarks."""

from riverpilot.markers.pattern import (  # noqa: F401
    D_MIN_MM,
    DotPattern,
    PlacementExhausted,
    generate_pattern,
    load_pattern,
    save_pattern,
)
from riverpilot.markers.llah import (  # noqa: F401
    DescriptorTable,
    LlahParams,
    TooFewDots,
    build_table,
)
from riverpilot.markers.ransac import (  # noqa: F401
    InsufficientCorrespondences,
    NoConsensus,
    estimate_homography_ransac,
)
from riverpilot.markers.render import (  # noqa: F401
    FRAME_HEIGHT_PX,
    FRAME_WIDTH_PX,
    ObservedFrame,
    SheetBehindCamera,
    render_points,
    render_view,
)
from riverpilot.markers.detect import Detection, detect  # noqa: F401
from riverpilot.markers.bench import BenchResult, build_bench_scene, run_bench  # noqa: F401
