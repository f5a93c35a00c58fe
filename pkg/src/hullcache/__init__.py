"""Cache-line-aware convex hull support queries and GJK distance."""

from .errors import (
    CapacityExceededError,
    DegenerateGeometryError,
    FormatError,
    HullcacheError,
)
from .hull import (
    HullTopology,
    PointSet,
    bounding_sphere,
    build_hull,
    ritter_sphere,
    sample_sphere,
    validate_topology,
)
from .meshio import load_mesh
from .fxtrig import (
    Q31Angle,
    approx_cos,
    approx_sin,
    decode_normal,
    encode_normal,
    q31_encode_angle,
    taylor_sin,
)
from .layouts import (
    FaceTraversingHull,
    InternallyConnectedHull,
    SphericalHull,
    WarmStartTable,
    build_face_traversing,
    build_internally_connected,
    build_spherical,
    compute_warm_starts,
    select_artificial_neighbors,
)
from .support import (
    Backend,
    SupportQueryResult,
    build_backends,
    support_face_traversing,
    support_hill_climb,
    support_hill_climb_warm,
    support_internally_connected,
    support_naive,
    support_spherical,
)
from .gjk import (
    GjkResult,
    GjkStatus,
    Pose,
    Simplex,
    SimplexPoint,
    gjk_query,
    minkowski_support,
    signed_volumes_closest,
)

__version__ = "0.1.0"
