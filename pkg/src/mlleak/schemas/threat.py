"""Threat-model taxonomy models for mlleak."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from .enums import Access, AttackKind, Auxiliary


class ThreatModel(BaseModel):
    """
    One access x auxiliary-data scenario.

    Example:
        >>> ThreatModel.parse("white_box/shadow").access
        <Access.WHITE_BOX: 'white_box'>
        >>> len(ThreatModel.all())
        4
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    access: Access
    auxiliary: Auxiliary

    @property
    def label(self) -> str:
        return f"{self.access.value}/{self.auxiliary.value}"

    @property
    def white_box(self) -> bool:
        return self.access == Access.WHITE_BOX

    @classmethod
    def parse(cls, label: str) -> ThreatModel:
        """Build from "access/auxiliary", e.g. "black_box/partial"."""
        access, sep, auxiliary = label.partition("/")
        if not sep:
            raise ValueError(
                f"threat model label must look like 'black_box/partial', got {label!r}"
            )
        return cls(access=Access(access), auxiliary=Auxiliary(auxiliary))

    @classmethod
    def all(cls) -> tuple[ThreatModel, ...]:
        """The four scenarios in a fixed order."""
        return tuple(cls(access=a, auxiliary=x) for a in Access for x in Auxiliary)

    def __str__(self) -> str:
        return self.label


def is_applicable(attack: AttackKind, threat: ThreatModel) -> bool:
    """
    Attack/threat applicability: membership inference under all four threat
    models, attribute inference only with white-box access (it needs
    embeddings), stealing only with black-box access.
    """
    if attack == AttackKind.ATTRIBUTE:
        return threat.access == Access.WHITE_BOX
    if attack == AttackKind.STEALING:
        return threat.access == Access.BLACK_BOX
    return True
