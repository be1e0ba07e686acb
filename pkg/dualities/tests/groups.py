# one presentation of every abelian group of order 2..16
GROUPS_UP_TO_16 = tuple(f'Z{n}' for n in range(2, 17)) + (
    'Z2xZ2',
    'Z2xZ4',
    'Z2xZ6',
    'Z2xZ8',
    'Z3xZ3',
    'Z4xZ4',
    'Z2xZ2xZ2',
    'Z2xZ2xZ4',
    'Z2xZ2xZ2xZ2',
)
