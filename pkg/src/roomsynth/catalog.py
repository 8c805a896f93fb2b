"""Built-in furniture catalog: footprints, placement habits, room templates."""

from __future__ import annotations

from dataclasses import dataclass, field

from .scene import RelationKind

NEAR = RelationKind.NEAR
SIDE_OF = RelationKind.SIDE_OF
IN_FRONT_OF = RelationKind.IN_FRONT_OF
ALIGNED_WITH = RelationKind.ALIGNED_WITH
OPPOSITE = RelationKind.OPPOSITE
AROUND = RelationKind.AROUND


@dataclass(frozen=True)
class Furniture:
    category: str
    w: int
    d: int
    h: int
    against_wall: bool = False
    relations: tuple[tuple[RelationKind, str], ...] = ()
    facing: str | None = None


def _f(category, w, d, h, against_wall=False, relations=(), facing=None) -> Furniture:
    return Furniture(category, w, d, h, against_wall, tuple(relations), facing)


FURNITURE: dict[str, Furniture] = {
    f.category: f
    for f in [
        # bathroom
        _f("bathtub", 170, 80, 60, True),
        _f("toilet", 40, 70, 80, True),
        _f("sink cabinet", 80, 50, 85, True),
        _f("shower", 90, 90, 210, True),
        _f("towel rack", 60, 30, 110, True, [(NEAR, "bathtub")]),
        _f("laundry basket", 40, 40, 60, False, [(NEAR, "sink cabinet")]),
        # bedroom
        _f("bed", 160, 200, 50, True),
        _f("nightstand", 50, 40, 55, True, [(NEAR, "bed")]),
        _f("wardrobe", 120, 60, 200, True),
        _f("dresser", 100, 50, 90, True),
        _f("desk", 120, 60, 75, True),
        _f("desk chair", 50, 50, 90, False, [(IN_FRONT_OF, "desk")], "desk"),
        _f("armchair", 80, 80, 90, False, [(NEAR, "coffee table")], "coffee table"),
        _f("floor lamp", 40, 40, 160, True),
        _f("bookshelf", 80, 30, 180, True),
        _f("plant stand", 40, 40, 70, True),
        # dining room
        _f("dining table", 160, 90, 75),
        _f("dining chair", 50, 50, 90, False, [(AROUND, "dining table")], "dining table"),
        _f("sideboard", 160, 50, 85, True),
        _f("bar cart", 60, 40, 85, False, [(NEAR, "dining table")]),
        _f("cabinet", 100, 50, 180, True),
        # kitchen
        _f("kitchen island", 180, 90, 90),
        _f("bar stool", 40, 40, 75, False, [(AROUND, "kitchen island")], "kitchen island"),
        _f("refrigerator", 80, 70, 180, True),
        _f("kitchen cabinet", 120, 60, 90, True),
        _f("stove", 80, 60, 90, True, [(NEAR, "kitchen cabinet")]),
        _f("trash bin", 40, 40, 60, True, [(NEAR, "kitchen cabinet")]),
        # living room
        _f("sofa", 200, 90, 85, True),
        _f("coffee table", 110, 60, 45, False, [(NEAR, "sofa")]),
        _f("tv stand", 160, 46, 55, True, [(OPPOSITE, "sofa")]),
        _f("side table", 50, 50, 55, False, [(SIDE_OF, "sofa")]),
        # buffet restaurant
        _f("buffet counter", 240, 80, 90, True),
        _f("restaurant table", 120, 80, 75),
        _f("restaurant chair", 50, 50, 90, False, [(AROUND, "restaurant table")], "restaurant table"),
        _f("drink station", 100, 60, 110, True, [(NEAR, "buffet counter")]),
        # classroom
        _f("blackboard", 240, 20, 120, True),
        _f("teacher desk", 140, 70, 75, False, [(NEAR, "blackboard")]),
        _f("student desk", 100, 50, 75, False, [(ALIGNED_WITH, "student desk")]),
        _f("student chair", 40, 40, 80, False, [(IN_FRONT_OF, "student desk")], "student desk"),
        # children's room
        _f("kids bed", 100, 180, 45, True),
        _f("toy chest", 80, 40, 50, True, [(NEAR, "kids bed")]),
        _f("play table", 80, 80, 50),
        _f("kids chair", 40, 40, 60, False, [(AROUND, "play table")], "play table"),
        _f("small tent", 120, 120, 120),
        # home gym
        _f("treadmill", 80, 180, 140, True),
        _f("exercise bike", 60, 120, 110),
        _f("weight bench", 60, 140, 50, False, [(NEAR, "dumbbell rack")]),
        _f("dumbbell rack", 120, 40, 80, True),
        _f("yoga mat", 70, 180, 2),
    ]
}


@dataclass(frozen=True)
class RoomTemplate:
    room_type: str
    # (category, min count, max count); anchors first
    items: tuple[tuple[str, int, int], ...]
    prompts: tuple[str, ...] = field(default=())


ROOM_TYPES: dict[str, RoomTemplate] = {
    t.room_type: t
    for t in [
        RoomTemplate(
            "bathroom",
            (("bathtub", 1, 1), ("toilet", 1, 1), ("sink cabinet", 1, 2), ("shower", 0, 1),
             ("towel rack", 1, 2), ("laundry basket", 0, 2), ("plant stand", 0, 2)),
            ("A bathroom", "A bright bathroom with a bathtub and a towel rack beside it",
             "A compact family bathroom"),
        ),
        RoomTemplate(
            "bedroom",
            (("bed", 1, 1), ("nightstand", 1, 2), ("wardrobe", 1, 1), ("dresser", 0, 1),
             ("desk", 0, 1), ("desk chair", 0, 1), ("bookshelf", 0, 2), ("floor lamp", 0, 1),
             ("plant stand", 0, 2)),
            ("A bedroom", "A cozy bedroom with a bed flanked by nightstands",
             "A minimalist bedroom with a small study corner"),
        ),
        RoomTemplate(
            "dining room",
            (("dining table", 1, 1), ("dining chair", 2, 8), ("sideboard", 1, 1), ("bar cart", 0, 1),
             ("cabinet", 0, 1), ("plant stand", 0, 3)),
            ("A dining room", "A modern dining room with a table in the center and cushioned chairs",
             "A dining room where a bar cart sits next to the dining table"),
        ),
        RoomTemplate(
            "kitchen",
            (("kitchen island", 1, 1), ("bar stool", 2, 4), ("refrigerator", 1, 1),
             ("kitchen cabinet", 1, 3), ("stove", 1, 1), ("trash bin", 0, 2), ("plant stand", 0, 1)),
            ("A kitchen", "A modern kitchen with a central island surrounded by bar stools",
             "A galley kitchen with plenty of cabinets"),
        ),
        RoomTemplate(
            "living room",
            (("sofa", 1, 1), ("coffee table", 1, 1), ("tv stand", 1, 1), ("armchair", 0, 2),
             ("side table", 0, 2), ("floor lamp", 0, 2), ("bookshelf", 0, 2), ("plant stand", 0, 2)),
            ("A living room", "A living room with a sofa facing the tv stand",
             "A reading-friendly living room with armchairs around a coffee table"),
        ),
        RoomTemplate(
            "buffet restaurant",
            (("buffet counter", 1, 2), ("restaurant table", 1, 2), ("restaurant chair", 2, 8),
             ("drink station", 0, 1), ("plant stand", 0, 3)),
            ("A buffet restaurant", "A buffet restaurant with a long counter against the wall",
             "A small buffet restaurant with a drink station next to the counter"),
        ),
        RoomTemplate(
            "classroom",
            (("blackboard", 1, 1), ("teacher desk", 1, 1), ("student desk", 2, 8),
             ("student chair", 2, 8), ("bookshelf", 0, 2)),
            ("A classroom", "A classroom with rows of student desks facing the blackboard",
             "A small seminar classroom"),
        ),
        RoomTemplate(
            "children's room",
            (("kids bed", 1, 1), ("toy chest", 1, 1), ("play table", 0, 1), ("kids chair", 0, 3),
             ("bookshelf", 0, 2), ("small tent", 0, 1), ("plant stand", 0, 1)),
            ("A children's room", "A playful children's room with a small tent in the corner",
             "A children's room with a play table and little chairs"),
        ),
        RoomTemplate(
            "home gym",
            (("treadmill", 1, 2), ("exercise bike", 0, 2), ("dumbbell rack", 1, 1),
             ("weight bench", 1, 2), ("yoga mat", 0, 2), ("plant stand", 0, 1)),
            ("A home gym", "A home gym with a treadmill along the wall and a weight bench",
             "A compact home gym"),
        ),
    ]
}


def lookup(category: str) -> Furniture | None:
    return FURNITURE.get(category.strip().lower())
