"""Architecture descriptor models for mlleak."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import LayerKind


class LayerSpec(BaseModel):
    """
    One layer of an architecture descriptor.

    conv layers use out_channels/kernel_size/stride/padding, dense layers use
    units, residual layers wrap `body` and add their input to its output.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: LayerKind
    out_channels: int | None = Field(None, ge=1)
    kernel_size: int | None = Field(None, ge=1)
    stride: int = Field(1, ge=1)
    padding: int = Field(0, ge=0)
    units: int | None = Field(None, ge=1)
    body: tuple[LayerSpec, ...] = ()

    @model_validator(mode="after")
    def _check_fields(self) -> LayerSpec:
        if self.kind == LayerKind.CONV and (self.out_channels is None or self.kernel_size is None):
            raise ValueError("conv layers need out_channels and kernel_size")
        if self.kind == LayerKind.DENSE and self.units is None:
            raise ValueError("dense layers need units")
        if self.kind == LayerKind.RESIDUAL and not self.body:
            raise ValueError("residual layers need a body")
        return self

    @classmethod
    def conv(
        cls, out_channels: int, kernel_size: int = 3, stride: int = 1, padding: int = 1
    ) -> LayerSpec:
        return cls(
            kind=LayerKind.CONV,
            out_channels=out_channels,
            kernel_size=kernel_size,
            stride=stride,
            padding=padding,
        )

    @classmethod
    def dense(cls, units: int) -> LayerSpec:
        return cls(kind=LayerKind.DENSE, units=units)

    @classmethod
    def relu(cls) -> LayerSpec:
        return cls(kind=LayerKind.RELU)

    @classmethod
    def flatten(cls) -> LayerSpec:
        return cls(kind=LayerKind.FLATTEN)

    @classmethod
    def residual(cls, *body: LayerSpec) -> LayerSpec:
        return cls(kind=LayerKind.RESIDUAL, body=tuple(body))


class Architecture(BaseModel):
    """
    Layer sequence of an image classifier.

    The final layer is a dense layer whose width is the class count; the
    softmax head is applied at prediction time.

    Example:
        >>> from mlleak.zoo import simple_cnn
        >>> arch = simple_cnn(channels=3, num_classes=10)
        >>> arch.output_width()
        10
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]

    @model_validator(mode="after")
    def _check_head(self) -> Architecture:
        if not self.layers or self.layers[-1].kind != LayerKind.DENSE:
            raise ValueError("the last layer must be dense (the classification layer)")
        return self

    def output_width(self) -> int:
        units = self.layers[-1].units
        assert units is not None
        return units

    def count(self, kind: LayerKind) -> int:
        """Number of layers of a kind, including residual bodies."""

        def _walk(layers: tuple[LayerSpec, ...]) -> int:
            return sum((layer.kind == kind) + _walk(layer.body) for layer in layers)

        return _walk(self.layers)

    def has_hidden_dense(self) -> bool:
        return any(layer.kind == LayerKind.DENSE for layer in self.layers[:-1])


LayerSpec.model_rebuild()
