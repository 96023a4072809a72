"""
Action space definitions.

An action space is a bounded box in R^d plus the metadata needed to draw its
members onto an image: where arrows start, whether the third cart3d component
is sampled or held fixed, and which dimensions are frozen.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
import structlog

from src.errors import ConfigurationError, DimensionMismatch

logger = structlog.get_logger(__name__)


class ActionKind(str, Enum):
    """Supported action space families."""
    NAV2D = "nav2d"
    CART3D = "cart3d"
    PICKPLACE = "pickplace"
    KEYPOINT2D = "keypoint2d"


class OriginMode(str, Enum):
    """Where candidate arrows start in the image."""
    IMAGE_BOTTOM_CENTER = "image-bottom-center"
    IMAGE_CENTER = "image-center"
    END_EFFECTOR_PIXEL = "end-effector-pixel"
    NONE = "none"  # markers only, no arrow


class HeightMode(str, Enum):
    """How the cart3d height/forward component is presented."""
    COLOR = "color"  # sampled, encoded by arrow color and label size
    FIXED = "fixed"  # frozen at zero displacement


KIND_DIMS: Dict[ActionKind, int] = {
    ActionKind.NAV2D: 2,
    ActionKind.CART3D: 3,
    ActionKind.PICKPLACE: 4,
    ActionKind.KEYPOINT2D: 2,
}

DEFAULT_ORIGIN: Dict[ActionKind, OriginMode] = {
    ActionKind.NAV2D: OriginMode.IMAGE_BOTTOM_CENTER,
    ActionKind.CART3D: OriginMode.END_EFFECTOR_PIXEL,
    ActionKind.PICKPLACE: OriginMode.NONE,
    ActionKind.KEYPOINT2D: OriginMode.NONE,
}


def _float_tuple(values: Iterable[Any]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class ActionSpaceSpec:
    """
    A bounded continuous action space.

    Attributes:
        kind: Action space family
        lower: Per-dimension lower bounds (pixels, or meters for cart3d)
        upper: Per-dimension upper bounds; lower == upper freezes a dimension
        origin_mode: Arrow origin rule (defaults per kind)
        origin_px: Arrow origin for end-effector-pixel on pixel spaces
        gripper_flag: cart3d gripper command, carried as metadata only
        ee_position: cart3d arrow origin in the action frame (meters)
        height_mode: Whether the third cart3d component is sampled
        frozen: Extra dimension indices held at the distribution mean
        name: Identifier stored on every Action of this space
    """

    kind: ActionKind
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    origin_mode: Optional[OriginMode] = None
    origin_px: Optional[Tuple[float, float]] = None
    gripper_flag: Optional[bool] = None
    ee_position: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    height_mode: HeightMode = HeightMode.COLOR
    frozen: Tuple[int, ...] = ()
    name: str = "default"

    def __post_init__(self) -> None:
        kind = ActionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "lower", _float_tuple(self.lower))
        object.__setattr__(self, "upper", _float_tuple(self.upper))
        object.__setattr__(self, "ee_position", _float_tuple(self.ee_position))
        object.__setattr__(self, "height_mode", HeightMode(self.height_mode))
        object.__setattr__(self, "frozen", tuple(sorted({int(i) for i in self.frozen})))
        origin = DEFAULT_ORIGIN[kind] if self.origin_mode is None else OriginMode(self.origin_mode)
        object.__setattr__(self, "origin_mode", origin)
        if self.origin_px is not None:
            object.__setattr__(self, "origin_px", _float_tuple(self.origin_px))

        expected = KIND_DIMS[kind]
        if len(self.lower) != expected or len(self.upper) != expected:
            raise ConfigurationError(
                f"{kind.value} needs {expected} bounds per side, "
                f"got {len(self.lower)} lower and {len(self.upper)} upper",
                field="action_space.lower",
            )
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo > hi:
                raise ConfigurationError(
                    f"lower[{i}]={lo} exceeds upper[{i}]={hi}", field="action_space.upper"
                )
        if any(i < 0 or i >= expected for i in self.frozen):
            raise ConfigurationError(
                f"frozen indices {self.frozen} out of range for {expected} dims",
                field="action_space.frozen",
            )
        if origin is OriginMode.END_EFFECTOR_PIXEL and kind is not ActionKind.CART3D:
            if self.origin_px is None or len(self.origin_px) != 2:
                raise ConfigurationError(
                    "end-effector-pixel origin needs origin_px = [u, v]",
                    field="action_space.origin_px",
                )
        if self.gripper_flag is not None and kind is not ActionKind.CART3D:
            raise ConfigurationError(
                "gripper_flag only applies to cart3d", field="action_space.gripper_flag"
            )
        if len(self.ee_position) != 3:
            raise ConfigurationError("ee_position needs 3 values", field="action_space.ee_position")

    @property
    def dims(self) -> int:
        """Number of continuous components."""
        return KIND_DIMS[self.kind]

    @property
    def space_id(self) -> str:
        return self.name

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def extent(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    @property
    def max_extent(self) -> float:
        """Largest per-dimension bound extent."""
        return float(np.max(self.extent))

    @property
    def frozen_mask(self) -> np.ndarray:
        """Boolean mask of dimensions that are never sampled."""
        mask = self.extent <= 0.0
        mask[list(self.frozen)] = True
        if self.kind is ActionKind.CART3D and self.height_mode is HeightMode.FIXED:
            mask[2] = True
        return mask

    def frozen_value(self) -> np.ndarray:
        """Default values for frozen dimensions: bounds midpoint, zero for fixed height."""
        values = (self.lower_array + self.upper_array) / 2.0
        if self.kind is ActionKind.CART3D and self.height_mode is HeightMode.FIXED:
            values[2] = float(np.clip(0.0, self.lower[2], self.upper[2]))
        return values

    def action(self, components: Iterable[float]) -> "Action":
        """Build an Action of this space (unclamped)."""
        action = Action(components=_float_tuple(components), space_id=self.name)
        if action.dims != self.dims:
            raise DimensionMismatch(self.dims, action.dims)
        return action

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ActionSpaceSpec":
        """
        Build an action space from a config table.

        Args:
            data: Mapping with keys matching the dataclass fields

        Returns:
            Validated ActionSpaceSpec

        Raises:
            ConfigurationError: If required keys are missing or invalid
        """
        for required in ("kind", "lower", "upper"):
            if required not in data:
                raise ConfigurationError(
                    f"Missing required field action_space.{required}",
                    field=f"action_space.{required}",
                )
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            logger.warning("Ignoring unknown action_space keys", keys=sorted(unknown))
        try:
            return cls(**{k: v for k, v in data.items() if k in known})
        except ValueError as e:
            raise ConfigurationError(str(e), field="action_space") from e


@dataclass(frozen=True)
class Action:
    """A point in an action space."""

    components: Tuple[float, ...]
    space_id: str = "default"

    @property
    def dims(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)


def clamp(spec: ActionSpaceSpec, action: Action) -> Action:
    """
    Clip every component of an action into the space bounds.

    Args:
        spec: The action space
        action: Action to clamp

    Returns:
        New Action with components in [lower, upper]

    Raises:
        DimensionMismatch: If the action length differs from spec.dims
    """
    if action.dims != spec.dims:
        raise DimensionMismatch(spec.dims, action.dims)
    clipped = np.clip(action.as_array(), spec.lower_array, spec.upper_array)
    return Action(components=_float_tuple(clipped), space_id=action.space_id)
