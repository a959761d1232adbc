# inobody tests
