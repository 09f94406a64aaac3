#include "namespaces.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "xlel/kbx.hpp"
#include "xlel/unicode.hpp"

namespace xlel::wikitext::detail {

namespace {

// clang-format off
constexpr std::string_view kFile[] = {
  "file", "image", "media", "datei", "bild", "fichier", "archivo", "imagen", "ficheiro", "arquivo",
  "imagem", "bestand", "afbeelding", "plik", "grafika", "файл", "изображение", "ファイル", "画像",
  "文件", "图像", "檔案", "파일", "그림", "dosya", "resim", "tiedosto", "kuva", "fil", "soubor",
  "obrázok", "súbor", "slika", "datoteka", "berkas", "gambar", "fail", "tập tin", "hình", "קובץ",
  "תמונה", "ملف", "صورة", "پرونده", "تصویر", "fitxer", "imatge", "αρχείο", "εικόνα", "файл",
  "चित्र", "संचिका", "ചിത്രം", "ไฟล์", "ภาพ", "படிமம்", "దస్త్రం", "picha", "faili", "file",
};
constexpr std::string_view kCategory[] = {
  "category", "kategorie", "catégorie", "categoría", "categoria", "categorie", "kategoria",
  "категория", "категорія", "катэгорыя", "категорија", "カテゴリ", "分类", "分類", "분류",
  "kategori", "luokka", "kategória", "kategorija", "thể loại", "קטגוריה", "تصنيف", "رده",
  "κατηγορία", "श्रेणी", "वर्ग", "বিষয়শ্রেণী", "വർഗ്ഗം", "หมวดหมู่", "பகுப்பு", "వర్గం", "jamii",
  "kategorio", "categorias",
};
constexpr std::string_view kWikipedia[] = {"w", "wikipedia"};
constexpr std::string_view kOther[] = {
  "template", "vorlage", "modèle", "plantilla", "predefinição", "sjabloon", "szablon", "шаблон",
  "テンプレート", "模板", "틀", "şablon", "malline", "mall", "skabelon", "mal", "šablona",
  "help", "hilfe", "aide", "ayuda", "ajuda", "portal", "portail", "user", "benutzer", "utilisateur",
  "usuario", "talk", "diskussion", "discussion", "discusión", "special", "spezial", "spécial",
  "especial", "module", "modul", "módulo", "mediawiki", "draft", "wp", "wikt", "wiktionary",
  "commons", "meta", "metawikimedia", "species", "wikispecies", "s", "q", "b", "v", "voy", "n",
  "wikinews", "wikisource", "wikiquote", "wikibooks", "wikiversity", "wikivoyage", "wikidata", "d",
  "mw", "phab", "foundation", "wmf", "simple", "project", "projekt", "projet",
};
// clang-format on

const std::unordered_map<std::string, PrefixKind>& table() {
  static const auto* t = [] {
    auto* m = new std::unordered_map<std::string, PrefixKind>();
    for (auto s : kFile) m->emplace(unicode::normalize_for_match(s), PrefixKind::file);
    for (auto s : kCategory) m->emplace(unicode::normalize_for_match(s), PrefixKind::category);
    for (auto s : kWikipedia) m->emplace(std::string(s), PrefixKind::wikipedia);
    for (auto s : kOther) m->emplace(unicode::normalize_for_match(s), PrefixKind::other);
    return m;
  }();
  return *t;
}

const kbx::LanguageSet& languages() {
  static const kbx::LanguageSet langs = kbx::default_languages();
  return langs;
}

bool looks_like_language_code(std::string_view p) {
  if (p.size() < 2 || p.size() > 12) return false;
  const std::size_t dash = p.find('-');
  const std::string_view head = p.substr(0, dash);
  if (head.size() < 2 || head.size() > 3) return false;
  return std::all_of(p.begin(), p.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '-'; });
}

}  // namespace

PrefixKind classify_prefix(std::string_view prefix) {
  const std::string key = unicode::normalize_for_match(prefix);
  if (key.empty()) return PrefixKind::none;
  if (const auto it = table().find(key); it != table().end()) return it->second;
  if (looks_like_language_code(key) && std::string_view(prefix).find(' ') == std::string_view::npos &&
      (languages().count(key) > 0 || prefix == key)) {
    return PrefixKind::language;
  }
  return PrefixKind::none;
}

}  // namespace xlel::wikitext::detail
