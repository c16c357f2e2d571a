from .records import (
    DWT_MAGIC,
    DWT_VERSION,
    RecordChecksumError,
    RecordError,
    RecordMagicError,
    RecordTruncatedError,
    SOURCE_FIXED_CAM,
    SOURCE_SYN_DYNAMIC,
    TripletRecord,
    load_record,
    serialize_record,
)
from .manifest import Manifest, ManifestEntry, ManifestError, content_hash
from .builders import (
    DEFAULT_TASK_MIX,
    FIXEDCAM_TASK_MIX,
    build_fixedcam_split,
    build_record,
    build_synthetic_split,
    check_record_alignment,
    draw_epoch,
    mix_hybrid,
)
