# Domain Layer - 핵심 엔티티 및 예외
