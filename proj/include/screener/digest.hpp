#pragma once

#include <string>
#include <string_view>

namespace screener {

// Incremental SHA-256, hex-encoded output.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  // Length-prefixed so that ("ab","c") and ("a","bc") digest differently.
  Sha256& field(std::string_view bytes);
  std::string hex();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace screener
